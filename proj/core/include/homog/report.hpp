#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace homog {

inline constexpr const char kVersion[] = "0.1.0";

struct ResultRow {
    std::string experiment;
    double epsilon = 0.0;  // 0 for the limit object
    double t = 0.0, x = 0.0;
    std::string statistic;
    double value = 0.0;
    double se = 0.0;
};

struct VerdictRow {
    std::string criterion_id;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// one line plot: statistic vs eps (log x)
struct CurveSpec {
    std::string name;
    std::string y_label;
    std::vector<std::pair<double, double>> points;  // (eps, value)
};

struct ExperimentReport {
    std::string name;
    std::vector<ResultRow> rows;
    std::vector<VerdictRow> verdicts;
    std::vector<CurveSpec> curves;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = kVersion;
    double runtime_seconds = 0.0;

    bool all_pass() const;
};

/// Writes results.csv, verdicts.csv and one SVG per curve into dir.
/// Provenance (config hash, seed, version) goes into '#' comment headers;
/// the timestamp comment is the only non-deterministic line.
void emit_report(const ExperimentReport& report, const std::string& dir);

std::string format_number(double v);  // deterministic shortest-ish formatting
std::string render_curve_svg(const CurveSpec& curve);
std::uint64_t fnv1a(const std::string& text);

}  // namespace homog
