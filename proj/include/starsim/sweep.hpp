#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "starsim/channel_model.hpp"
#include "starsim/scenario.hpp"

namespace starsim {

enum class Method { safe_isac, random_phase_star, reflect_only_ris };

const char* method_name(Method m);
Method parse_method(const std::string& name);  // throws on unknown

enum class SweepVariable { n_jam, detector_distance, n_ris };

SweepVariable parse_sweep_variable(const std::string& name);
const char* sweep_variable_name(SweepVariable v);

struct SweepSpec {
    SweepVariable variable = SweepVariable::n_jam;
    std::vector<double> values;  // nonempty, sorted
    int n_trials = 100;
    std::vector<Method> methods = {Method::safe_isac, Method::random_phase_star,
                                   Method::reflect_only_ris};
    ScenarioConfig base;
    std::uint64_t seed_base = 1;

    void validate() const;
};

struct SweepRow {
    std::string method;
    double sweep_value = 0.0;
    int trial = 0;
    double jam_gain_db = 0.0;
    double malicious_sinr_db = 0.0;
    double comm_gain_db = 0.0;
    double sum_rate = 0.0;
    double p_det_malicious = 0.0;
    double p_det_isac = 0.0;
    bool feasible_flag = true;
    double wall_time_ms = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by (method, value, trial)
};

struct MethodOutcome {
    MetricReport metrics;
    SolveReport report;
    bool feasible = true;
};

/// Runs one method on a fixed channel realization. Solver failures are
/// reported through the feasibility flag, never thrown.
MethodOutcome run_method(Method method, const ChannelSet& ch,
                         const ScenarioConfig& cfg);

/// Per-(value, trial) cell: trial seed = seed_base ^ hash(value, trial); all
/// methods in a cell consume the identical ChannelSet. Trials run in
/// parallel; rows are sorted before returning, so output is deterministic.
/// record_timings keeps wall_time_ms at zero when false (deterministic CSV).
SweepResult run_sweep(const SweepSpec& spec, int n_threads = 0,
                      bool record_timings = false);

/// Exact header and RFC-4180 quoting; LF line endings.
void write_csv(const SweepResult& result, const std::string& path);

SweepResult read_csv(const std::string& path);

/// One gnuplot script + data file per metric: x = sweep value, y = trial
/// mean (dB metrics as stored), error bars = standard error, one series per
/// method. Empty results produce no files.
void emit_plots(const SweepResult& result, const std::string& out_dir);

}  // namespace starsim
