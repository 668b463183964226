// Command-line front end: verify, bench, trace, falsify, gen-net.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tightcert/certification.hpp"
#include "tightcert/generator.hpp"
#include "tightcert/oracle.hpp"
#include "tightcert/propagation.hpp"
#include "tightcert/report.hpp"

namespace tc = tightcert;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitMisclassified = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string model;
  std::string data;
  std::vector<std::string> strategies;
  std::optional<double> eps;
  double eps_max = 1.0;
  double tol = 1e-4;
  int max_iter = 20;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "table";
  std::string margin = "per-output";
  std::vector<double> clip;
  bool timing = false;
  // single-input selection
  std::optional<std::size_t> index;
  std::string input;
  std::optional<long long> label;
  // falsify
  std::size_t budget = 100000;
  // bench
  std::optional<std::size_t> limit;
  // gen-net
  std::string arch;
  std::string activation = "sigmoid";
  bool qualifying = false;
  bool mixed = false;
  std::string dataset_out;
  std::size_t samples = 20;
};

std::vector<tc::Method> methods(const Options& o, std::vector<std::string> fallback) {
  const auto& names = o.strategies.empty() ? fallback : o.strategies;
  std::vector<tc::Method> out;
  for (const auto& n : names) out.push_back(tc::parse_method(n));
  return out;
}

tc::VerifyOptions verify_options(const Options& o) {
  tc::VerifyOptions v;
  if (o.margin == "per-output")
    v.margin = tc::MarginMode::PerOutput;
  else if (o.margin == "joint")
    v.margin = tc::MarginMode::Joint;
  else
    throw UsageError("--margin must be per-output or joint");
  if (!o.clip.empty()) v.clip = std::make_pair(o.clip[0], o.clip[1]);
  v.alg1.seed = o.seed;
  return v;
}

tc::SearchParams search_params(const Options& o) {
  tc::SearchParams s;
  s.eps_hi = o.eps_max;
  s.tol = o.tol;
  s.max_iter = o.max_iter;
  return s;
}

struct SingleInput {
  tc::Vector x;
  std::optional<tc::Index> label;
};

SingleInput select_input(const Options& o, const tc::Network& net) {
  SingleInput in;
  if (!o.input.empty()) {
    std::string text = o.input;
    for (char& c : text)
      if (c == ',') c = ' ';
    std::istringstream ss(text);
    std::vector<double> values;
    for (double v; ss >> v;) values.push_back(v);
    if (!ss.eof()) throw tc::ParseError("--input: bad number list '" + o.input + "'");
    if (static_cast<tc::Index>(values.size()) != net.input_dim())
      throw tc::StructuralError("--input has " + std::to_string(values.size()) +
                                " values, model expects " + std::to_string(net.input_dim()));
    in.x = Eigen::Map<tc::Vector>(values.data(), net.input_dim());
  } else if (!o.data.empty()) {
    const tc::Dataset data = tc::load_dataset(o.data, net.input_dim());
    const std::size_t i = o.index.value_or(0);
    if (i >= data.size())
      throw UsageError("--index " + std::to_string(i) + " out of range (dataset has " +
                       std::to_string(data.size()) + " samples)");
    in.x = data.inputs[i];
    in.label = data.labels[i];
  } else {
    throw UsageError("give --input or --data (with --index)");
  }
  if (o.label) in.label = static_cast<tc::Index>(*o.label);
  return in;
}

std::ostream& output(const Options& o, std::ofstream& file) {
  if (o.out.empty()) return std::cout;
  file.open(o.out, std::ios::binary);
  if (!file) throw tc::ParseError("cannot write '" + o.out + "'");
  return file;
}

void require_misclassification_check(const tc::Network& net, const SingleInput& in) {
  if (in.label && tc::predict_label(net, in.x) != *in.label) {
    throw tc::MisclassifiedError("misclassified: network predicts " +
                                 std::to_string(tc::predict_label(net, in.x)) + ", label is " +
                                 std::to_string(*in.label));
  }
}

int cmd_verify(const Options& o) {
  const tc::Network net = tc::load_network(o.model);
  const SingleInput in = select_input(o, net);
  require_misclassification_check(net, in);
  const tc::VerifyOptions vo = verify_options(o);
  for (tc::Method m : methods(o, {"newise"})) {
    if (o.eps) {
      const tc::VerifyOutcome r = tc::verify_at_epsilon(net, in.x, *o.eps, m, vo);
      std::cout << "strategy=" << tc::to_string(m) << " label=" << r.label
                << " eps=" << tc::fixed(*o.eps, 6) << " verdict=" << tc::to_string(r.status)
                << " margin=" << tc::fixed(r.margin_lo, 6);
      if (r.failing_label) std::cout << " failing_label=" << *r.failing_label;
      std::cout << '\n';
    } else {
      const tc::CertifiedBound b = tc::certified_lower_bound(net, in.x, m, search_params(o), vo);
      std::cout << tc::describe_bound(b, o.timing) << '\n';
    }
  }
  return kExitOk;
}

int cmd_bench(const Options& o) {
  if (o.data.empty()) throw UsageError("bench needs --data");
  const tc::Network net = tc::load_network(o.model);
  tc::Dataset data = tc::load_dataset(o.data, net.input_dim());
  if (o.limit && *o.limit < data.size()) {
    data.inputs.resize(*o.limit);
    data.labels.resize(*o.limit);
  }
  const auto ms = methods(o, {"newise", "minarea", "parallel", "taylor"});
  const tc::ReportFormat format = tc::parse_report_format(o.format);
  std::vector<tc::BatchReport> reports;
  for (tc::Method m : ms)
    reports.push_back(
        tc::batch_certify(net, data, m, search_params(o), verify_options(o), o.workers));
  std::ofstream file;
  std::ostream& out = output(o, file);
  switch (format) {
    case tc::ReportFormat::Table:
      tc::write_bench_table(out, reports, o.timing);
      break;
    case tc::ReportFormat::Records:
      tc::write_bench_records(out, reports, o.timing);
      break;
    case tc::ReportFormat::Json:
      tc::write_bench_json(out, reports, o.timing);
      break;
  }
  return kExitOk;
}

int cmd_trace(const Options& o) {
  const tc::Network net = tc::load_network(o.model);
  const SingleInput in = select_input(o, net);
  if (!o.eps) throw UsageError("trace needs --eps");
  const auto ms = methods(o, {"newise", "taylor"});
  if (ms.size() != 2) throw UsageError("trace compares exactly two strategies");
  std::vector<tc::IntervalTrace> traces;
  const tc::InputSpec spec{in.x, *o.eps, verify_options(o).clip};
  for (tc::Method m : ms) {
    const auto s = tc::as_strategy(m);
    if (!s) throw UsageError("trace supports newise, minarea, parallel and taylor");
    traces.push_back(tc::propagate(net, spec, *s).trace);
  }
  const auto metrics = tc::compare_traces(traces[0], traces[1]);
  if (o.out.empty()) {
    tc::write_trace_metrics(std::cout, metrics);
    return kExitOk;
  }
  for (std::size_t k = 0; k < 2; ++k) {
    const std::string path = o.out + "." + std::string(tc::to_string(ms[k])) + ".csv";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw tc::ParseError("cannot write '" + path + "'");
    tc::write_trace(f, traces[k]);
  }
  std::ofstream f(o.out + ".metrics.csv", std::ios::binary);
  if (!f) throw tc::ParseError("cannot write '" + o.out + ".metrics.csv'");
  tc::write_trace_metrics(f, metrics);
  std::cout << "wrote " << o.out << ".{" << tc::to_string(ms[0]) << ',' << tc::to_string(ms[1])
            << ",metrics}.csv (" << metrics.size() << " neurons)\n";
  return kExitOk;
}

int cmd_falsify(const Options& o) {
  const tc::Network net = tc::load_network(o.model);
  const SingleInput in = select_input(o, net);
  require_misclassification_check(net, in);
  if (!o.eps) throw UsageError("falsify needs --eps");
  tc::FalsifyOptions fo;
  fo.budget = o.budget;
  fo.seed = o.seed;
  fo.clip = verify_options(o).clip;
  const auto cex = tc::falsify(net, in.x, *o.eps, fo);
  if (!cex) {
    std::cout << "no counterexample found (budget " << o.budget << ")\n";
    return kExitOk;
  }
  std::cout << "counterexample: label " << cex->original << " -> " << cex->predicted
            << " at distance " << tc::fixed(cex->distance, 6) << "\nx =";
  for (tc::Index j = 0; j < cex->x.size(); ++j) std::cout << ' ' << cex->x[j];
  std::cout << '\n';
  return kExitOk;
}

int cmd_gen_net(const Options& o) {
  if (o.qualifying == o.mixed) throw UsageError("give exactly one of --qualifying / --mixed");
  const tc::Architecture arch =
      tc::parse_architecture(o.arch, tc::parse_activation(o.activation));
  const tc::Network net = tc::random_network(
      arch, o.qualifying ? tc::WeightMode::Qualifying : tc::WeightMode::Mixed, o.seed);
  const tc::MonotonicityReport rep = tc::check_monotonic_conditions(net);
  if (o.qualifying && !rep.qualifies)
    throw tc::Error("generated network does not satisfy the monotonicity conditions");
  if (o.out.empty())
    std::cout << tc::network_to_json(net);
  else
    tc::save_network(net, o.out);
  if (!o.dataset_out.empty())
    tc::save_dataset(tc::random_dataset(net, o.samples, o.seed + 1), o.dataset_out);
  std::cerr << "qualifies=" << (rep.qualifies ? "true" : "false") << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified robustness bounds for S-shaped feed-forward networks"};
  app.require_subcommand(1);
  Options o;

  auto add_model = [&](CLI::App* c) {
    c->add_option("--model", o.model, "Model file (JSON)")->required();
  };
  auto add_input = [&](CLI::App* c) {
    c->add_option("--data", o.data, "Dataset file");
    c->add_option("--index", o.index, "Sample index in the dataset (default 0)");
    c->add_option("--input", o.input, "Comma-separated input vector");
    c->add_option("--label", o.label, "Expected label");
  };
  auto add_common = [&](CLI::App* c) {
    c->add_option("--strategy", o.strategies, "newise|minarea|parallel|taylor|alg1 (repeatable)");
    c->add_option("--margin", o.margin, "per-output|joint");
    c->add_option("--clip", o.clip, "Global input box lo hi")->expected(2);
    c->add_option("--seed", o.seed, "Random seed");
    c->add_flag("--timing", o.timing, "Report wall-clock times");
  };
  auto add_search = [&](CLI::App* c) {
    c->add_option("--eps-max", o.eps_max, "Binary-search ceiling")->check(CLI::PositiveNumber);
    c->add_option("--tol", o.tol, "Relative search tolerance")->check(CLI::NonNegativeNumber);
    c->add_option("--max-iter", o.max_iter, "Binary-search iterations")
        ->check(CLI::NonNegativeNumber);
  };

  auto* verify = app.add_subcommand("verify", "Certified bound (or fixed-eps verdict) for one input");
  add_model(verify);
  add_input(verify);
  add_common(verify);
  add_search(verify);
  verify->add_option("--eps", o.eps, "Verify at this radius only")->check(CLI::NonNegativeNumber);

  auto* bench = app.add_subcommand("bench", "Compare strategies over a dataset");
  add_model(bench);
  add_common(bench);
  add_search(bench);
  bench->add_option("--data", o.data, "Dataset file")->required();
  bench->add_option("--limit", o.limit, "Use only the first N samples");
  bench->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--out", o.out, "Write the report here instead of stdout");
  bench->add_option("--format", o.format, "table|records|json");

  auto* trace = app.add_subcommand("trace", "Interval traces of two strategies and their ratios");
  add_model(trace);
  add_input(trace);
  add_common(trace);
  trace->add_option("--eps", o.eps, "Input radius")->required()->check(CLI::NonNegativeNumber);
  trace->add_option("--out", o.out, "Output prefix for trace and metric files");

  auto* falsify = app.add_subcommand("falsify", "Search the ball for an adversarial example");
  add_model(falsify);
  add_input(falsify);
  add_common(falsify);
  falsify->add_option("--eps", o.eps, "Input radius")->required()->check(CLI::NonNegativeNumber);
  falsify->add_option("--budget", o.budget, "Forward evaluations");

  auto* gen = app.add_subcommand("gen-net", "Write a random network");
  gen->add_option("--arch", o.arch, "Layer sizes, e.g. 2-10-10-3")->required();
  gen->add_option("--activation", o.activation, "sigmoid|tanh|arctan|relu");
  gen->add_flag("--qualifying", o.qualifying, "Satisfy the monotonicity conditions");
  gen->add_flag("--mixed", o.mixed, "Weights of both signs");
  gen->add_option("--seed", o.seed, "Random seed");
  gen->add_option("--out", o.out, "Model path (default stdout)");
  gen->add_option("--dataset-out", o.dataset_out, "Also write a dataset of correctly classified samples");
  gen->add_option("--samples", o.samples, "Dataset size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*verify) return cmd_verify(o);
    if (*bench) return cmd_bench(o);
    if (*trace) return cmd_trace(o);
    if (*falsify) return cmd_falsify(o);
    if (*gen) return cmd_gen_net(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const tc::MisclassifiedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMisclassified;
  } catch (const tc::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const tc::StructuralError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
