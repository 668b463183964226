#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tightcert/certification.hpp"
#include "tightcert/propagation.hpp"

namespace tightcert {

enum class ReportFormat { Table, Records, Json };
ReportFormat parse_report_format(const std::string& name);

/// printf-style "%.*f".
std::string fixed(double value, int decimals);

/// Per-strategy mean, standard deviation, counts, and the improvement of the
/// first report's mean over each strategy's mean, 100 (first - mean) / mean.
/// Times appear only when `timing` is set.
void write_bench_table(std::ostream& out, const std::vector<BatchReport>& reports, bool timing);

/// One CSV row per (strategy, input): strategy,index,label,predicted,status,
/// bound,iterations[,time].
void write_bench_records(std::ostream& out, const std::vector<BatchReport>& reports, bool timing);

void write_bench_json(std::ostream& out, const std::vector<BatchReport>& reports, bool timing);

/// CSV layer,index,red,blue,green; undefined ratios are written as
/// "undefined".
void write_trace_metrics(std::ostream& out, const std::vector<TraceMetric>& metrics);

/// Single-line summary of one certified bound.
std::string describe_bound(const CertifiedBound& bound, bool timing);

}  // namespace tightcert
