#include "tightcert/report.hpp"

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace tightcert {

namespace {

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0 ? 0.0 : v);
  return buf;
}

std::string status_of(const InputRecord& r) {
  if (r.bound) return r.bound->hit_ceiling ? "ceiling" : "certified";
  if (r.predicted != r.label) return "misclassified";
  return "error";
}

std::string improvement_cell(const BatchReport& report, const BatchReport& base) {
  if (report.certified == 0 || base.certified == 0 || report.mean == 0) return "n/a";
  return fixed(round_half_up_2(improvement_percent(base.mean, report.mean)), 2);
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "table") return ReportFormat::Table;
  if (name == "records") return ReportFormat::Records;
  if (name == "json") return ReportFormat::Json;
  throw ParseError("unknown report format '" + name + "'");
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

void write_bench_table(std::ostream& out, const std::vector<BatchReport>& reports, bool timing) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"Strategy", "Average", "Std.Dev"};
  if (timing) head.push_back("Time(s)");
  head.insert(head.end(), {"Certified", "Skipped", "Failed", "Impr.(%)"});
  rows.push_back(head);
  for (const BatchReport& r : reports) {
    std::vector<std::string> row{std::string(to_string(r.method)), fixed(r.mean, 4),
                                 fixed(r.std_dev, 4)};
    if (timing) row.push_back(fixed(r.mean_time, 4));
    row.insert(row.end(), {std::to_string(r.certified), std::to_string(r.skipped_misclassified),
                           std::to_string(r.failed), improvement_cell(r, reports.front())});
    rows.push_back(row);
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << "  ";
      if (c == 0)
        out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      else
        out << std::right << std::setw(static_cast<int>(width[c])) << row[c];
    }
    out << '\n';
  }
}

void write_bench_records(std::ostream& out, const std::vector<BatchReport>& reports, bool timing) {
  out << "strategy,index,label,predicted,status,bound,iterations" << (timing ? ",time" : "")
      << '\n';
  for (const BatchReport& r : reports) {
    for (const InputRecord& rec : r.records) {
      out << to_string(r.method) << ',' << rec.index << ',' << rec.label << ',' << rec.predicted
          << ',' << status_of(rec) << ',';
      if (rec.bound)
        out << full(rec.bound->epsilon) << ',' << rec.bound->iterations;
      else
        out << ',';
      if (timing) out << ',' << (rec.bound ? full(rec.bound->wall_time) : "");
      out << '\n';
    }
  }
  for (const BatchReport& r : reports) {
    out << "# summary " << to_string(r.method) << " mean=" << full(r.mean)
        << " std=" << full(r.std_dev) << " certified=" << r.certified
        << " skipped=" << r.skipped_misclassified << " failed=" << r.failed;
    if (timing) out << " mean_time=" << full(r.mean_time);
    out << '\n';
  }
}

void write_bench_json(std::ostream& out, const std::vector<BatchReport>& reports, bool timing) {
  nlohmann::ordered_json root = nlohmann::ordered_json::array();
  for (const BatchReport& r : reports) {
    nlohmann::ordered_json j;
    j["strategy"] = std::string(to_string(r.method));
    j["mean"] = r.mean;
    j["std_dev"] = r.std_dev;
    if (timing) j["mean_time"] = r.mean_time;
    j["certified"] = r.certified;
    j["skipped_misclassified"] = r.skipped_misclassified;
    j["failed"] = r.failed;
    if (r.certified && reports.front().certified && r.mean != 0)
      j["improvement_percent"] = round_half_up_2(improvement_percent(reports.front().mean, r.mean));
    nlohmann::ordered_json recs = nlohmann::ordered_json::array();
    for (const InputRecord& rec : r.records) {
      nlohmann::ordered_json e;
      e["index"] = rec.index;
      e["label"] = rec.label;
      e["predicted"] = rec.predicted;
      e["status"] = status_of(rec);
      if (rec.bound) {
        e["bound"] = rec.bound->epsilon;
        e["iterations"] = rec.bound->iterations;
        if (timing) e["time"] = rec.bound->wall_time;
      }
      if (!rec.error.empty()) e["error"] = rec.error;
      recs.push_back(std::move(e));
    }
    j["records"] = std::move(recs);
    root.push_back(std::move(j));
  }
  out << root.dump(2) << '\n';
}

void write_trace_metrics(std::ostream& out, const std::vector<TraceMetric>& metrics) {
  auto cell = [](const std::optional<double>& v) { return v ? full(*v) : std::string("undefined"); };
  out << "layer,index,red,blue,green\n";
  for (const TraceMetric& m : metrics)
    out << m.layer << ',' << m.index << ',' << cell(m.red) << ',' << cell(m.blue) << ','
        << cell(m.green) << '\n';
}

std::string describe_bound(const CertifiedBound& bound, bool timing) {
  std::ostringstream s;
  s << "strategy=" << to_string(bound.method) << " label=" << bound.label
    << " bound=" << fixed(bound.epsilon, 6) << " iterations=" << bound.iterations;
  if (bound.hit_ceiling) s << " (search ceiling)";
  if (timing) s << " time=" << fixed(bound.wall_time, 4) << "s";
  return s.str();
}

}  // namespace tightcert
