#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "suiteopt/selection_types.hpp"
#include "suiteopt/sensors.hpp"
#include "suiteopt/slamgraph.hpp"

namespace suiteopt {

/// 64-bit FNV-1a of a canonical run-configuration string; every output file
/// carries it so reruns are checkable at a glance.
std::uint64_t fingerprint64(const std::string& canonical);
std::string fingerprint_hex(const std::string& canonical);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Shortest form for dollar amounts: integral values print without an exponent.
std::string format_money(double value);

// JSON documents (sorted keys, 2-space indent, trailing newline).
std::string score_json(const EvalScore& score, const std::string& fingerprint);
std::string selection_json(const SensorLibrary& library, const Selection& selection,
                           double budget_usd, const std::string& fingerprint);
std::string trace_json(const SensorLibrary& library, const GreedyTrace& trace,
                       double budget_usd, const std::string& fingerprint);
std::string plan_json(const SensorLibrary& library, const ResiliencePlan& plan,
                      const std::string& fingerprint);
std::string report_json(const SolveReport& report, const std::string& fingerprint);

// CSV documents; the first line is a '#' comment with the fingerprint.
std::string trace_csv(const SensorLibrary& library, const GreedyTrace& trace,
                      const std::string& fingerprint);
std::string front_csv(const std::vector<ParetoPoint>& front, const std::string& fingerprint);
std::string grid_csv(const SensorLibrary& library, const ResiliencePlan& plan,
                     const std::string& fingerprint);

/// Cost vs normalized-performance scatter of the pooled architectures with
/// the Pareto front drawn as a dashed polyline. Standalone SVG.
std::string front_svg(const std::vector<ParetoPoint>& pool,
                      const std::vector<ParetoPoint>& front, const std::string& fingerprint);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace suiteopt
