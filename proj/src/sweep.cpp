#include "starsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "starsim/concealment.hpp"
#include "starsim/jamming.hpp"

namespace starsim {

const char* method_name(Method m) {
    switch (m) {
        case Method::safe_isac: return "safe_isac";
        case Method::random_phase_star: return "random_phase_star";
        case Method::reflect_only_ris: return "reflect_only_ris";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "safe_isac") return Method::safe_isac;
    if (name == "random_phase_star") return Method::random_phase_star;
    if (name == "reflect_only_ris") return Method::reflect_only_ris;
    throw std::invalid_argument("unknown method: " + name);
}

SweepVariable parse_sweep_variable(const std::string& name) {
    if (name == "n_jam") return SweepVariable::n_jam;
    if (name == "detector_distance") return SweepVariable::detector_distance;
    if (name == "n_ris") return SweepVariable::n_ris;
    throw std::invalid_argument("unknown sweep variable: " + name);
}

const char* sweep_variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::n_jam: return "n_jam";
        case SweepVariable::detector_distance: return "detector_distance";
        case SweepVariable::n_ris: return "n_ris";
    }
    return "?";
}

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep values must be nonempty");
    if (!std::is_sorted(values.begin(), values.end()))
        throw std::invalid_argument("sweep values must be sorted");
    if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
    if (methods.empty()) throw std::invalid_argument("methods must be nonempty");
    base.validate();
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed_base, double value, int trial) {
    std::uint64_t vb;
    static_assert(sizeof(vb) == sizeof(value));
    std::memcpy(&vb, &value, sizeof(vb));
    return seed_base ^ mix64(mix64(vb) ^ (0x51ed2701u + std::uint64_t(trial)));
}

void apply_sweep_value(ScenarioConfig& cfg, SweepVariable var, double value) {
    switch (var) {
        case SweepVariable::n_jam:
            cfg.n_jam = static_cast<int>(std::lround(value));
            break;
        case SweepVariable::detector_distance:
            cfg.detector_distance = value;
            cfg.geometry.erase("detector");
            break;
        case SweepVariable::n_ris:
            cfg.n_ris = static_cast<int>(std::lround(value));
            break;
    }
}

bool outcome_feasible(const MetricReport& m, const ScenarioConfig& cfg) {
    return m.gamma_sr >= cfg.gamma_min * (1.0 - 1e-6) &&
           m.comm_gain >= cfg.g_th * (1.0 - 1e-6);
}

}  // namespace

MethodOutcome run_method(Method method, const ChannelSet& ch,
                         const ScenarioConfig& cfg) {
    const int L = cfg.n_ris;
    MethodOutcome out;
    try {
        switch (method) {
            case Method::safe_isac: {
                auto [xr, p2_rep] = solve_p2(ch, cfg);
                ConcealmentProblem cp = build_problem(ch, cfg);
                DinkelbachOptions dopt;
                dopt.seed = substream_seed(cfg.seed, "concealment");
                ConcealmentSolution cs = solve_concealment(cp, dopt);
                StarRisState ris = StarRisState::from_phases(
                    cs.psi_t, xr.psi_r, cfg.beta_t, cfg.beta_r);
                out.metrics = evaluate_metrics(ch, ris, cfg);
                out.report = p2_rep;
                out.feasible = p2_rep.feasible && cs.feasible &&
                               outcome_feasible(out.metrics, cfg);
                break;
            }
            case Method::random_phase_star: {
                StarRisState ris = StarRisState::from_phases(
                    random_unit_phases(cfg.seed, "psi_t_init", L),
                    random_unit_phases(cfg.seed, "psi_r_init", L),
                    cfg.beta_t, cfg.beta_r);
                out.metrics = evaluate_metrics(ch, ris, cfg);
                out.report.solver = "random_phase";
                out.report.termination = "n/a";
                out.feasible = outcome_feasible(out.metrics, cfg);
                break;
            }
            case Method::reflect_only_ris: {
                // All incident energy reflected: no transmission subspace, so
                // the sensing side sees no RIS path at all.
                ScenarioConfig rcfg = cfg;
                rcfg.beta_r = 1.0;
                auto [xr, p2_rep] = solve_p2(ch, rcfg);
                StarRisState ris;
                ris.psi_t = VecC::Ones(L);
                ris.psi_r = xr.psi_r;
                ris.amp_t = 0.0;
                ris.amp_r = 1.0;
                out.metrics = evaluate_metrics(ch, ris, cfg);
                out.report = p2_rep;
                out.feasible = p2_rep.feasible && outcome_feasible(out.metrics, cfg);
                break;
            }
        }
    } catch (const std::exception& e) {
        StarRisState ris = StarRisState::from_phases(
            VecC::Ones(L), VecC::Ones(L), cfg.beta_t, cfg.beta_r);
        out.metrics = evaluate_metrics(ch, ris, cfg);
        out.report.termination = std::string("error: ") + e.what();
        out.feasible = false;
    }
    return out;
}

SweepResult run_sweep(const SweepSpec& spec, int n_threads, bool record_timings) {
    spec.validate();
    struct Task {
        double value;
        int trial;
    };
    std::vector<Task> tasks;
    for (double v : spec.values)
        for (int t = 0; t < spec.n_trials; ++t) tasks.push_back({v, t});

    std::vector<std::vector<SweepRow>> cell_rows(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            ScenarioConfig cfg = spec.base;
            apply_sweep_value(cfg, spec.variable, task.value);
            cfg.seed = trial_seed(spec.seed_base, task.value, task.trial);
            ChannelSet ch = generate_channels(cfg);
            for (Method m : spec.methods) {
                auto t0 = std::chrono::steady_clock::now();
                MethodOutcome oc = run_method(m, ch, cfg);
                double ms = 0.0;
                if (record_timings)
                    ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0).count();
                SweepRow row;
                row.method = method_name(m);
                row.sweep_value = task.value;
                row.trial = task.trial;
                row.jam_gain_db = linear_to_db(oc.metrics.jam_gain);
                row.malicious_sinr_db = linear_to_db(oc.metrics.gamma_sd);
                row.comm_gain_db = linear_to_db(oc.metrics.comm_gain);
                row.sum_rate = oc.metrics.sum_rate;
                row.p_det_malicious = oc.metrics.p_det_malicious;
                row.p_det_isac = oc.metrics.p_det_isac;
                row.feasible_flag = oc.feasible;
                row.wall_time_ms = ms;
                cell_rows[i].push_back(std::move(row));
            }
        }
    };
    int nt = n_threads > 0 ? n_threads
                           : std::max(1u, std::thread::hardware_concurrency());
    nt = std::min<int>(nt, static_cast<int>(tasks.size()));
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    SweepResult result;
    for (auto& cell : cell_rows)
        for (auto& row : cell) result.rows.push_back(std::move(row));
    std::sort(result.rows.begin(), result.rows.end(),
              [](const SweepRow& a, const SweepRow& b) {
                  if (a.method != b.method) return a.method < b.method;
                  if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
                  return a.trial < b.trial;
              });
    return result;
}

namespace {

constexpr const char* kCsvHeader =
    "method,sweep_value,trial,jam_gain_db,malicious_sinr_db,comm_gain_db,"
    "sum_rate,p_det_malicious,p_det_isac,feasible_flag,wall_time_ms";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void write_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << kCsvHeader << "\n";
    for (const auto& r : result.rows) {
        out << r.method << ',' << fmt(r.sweep_value) << ',' << r.trial << ','
            << fmt(r.jam_gain_db) << ',' << fmt(r.malicious_sinr_db) << ','
            << fmt(r.comm_gain_db) << ',' << fmt(r.sum_rate) << ','
            << fmt(r.p_det_malicious) << ',' << fmt(r.p_det_isac) << ','
            << (r.feasible_flag ? 1 : 0) << ',' << fmt(r.wall_time_ms) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

SweepResult read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty CSV: " + path);
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw std::runtime_error("unexpected CSV header in " + path);
    SweepResult result;
    while (std::getline(in, line)) {
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(is, field, ',')) f.push_back(field);
        if (f.size() != 11) throw std::runtime_error("bad CSV row: " + line);
        SweepRow r;
        r.method = f[0];
        r.sweep_value = std::stod(f[1]);
        r.trial = std::stoi(f[2]);
        r.jam_gain_db = std::stod(f[3]);
        r.malicious_sinr_db = std::stod(f[4]);
        r.comm_gain_db = std::stod(f[5]);
        r.sum_rate = std::stod(f[6]);
        r.p_det_malicious = std::stod(f[7]);
        r.p_det_isac = std::stod(f[8]);
        r.feasible_flag = f[9] != "0";
        r.wall_time_ms = std::stod(f[10]);
        result.rows.push_back(std::move(r));
    }
    return result;
}

void emit_plots(const SweepResult& result, const std::string& out_dir) {
    if (result.rows.empty()) {
        std::cerr << "emit_plots: empty result, nothing written\n";
        return;
    }
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir))
        throw std::runtime_error("cannot create plot directory: " + out_dir);

    struct MetricDef {
        const char* name;
        double SweepRow::* field;
    };
    const MetricDef metrics[] = {
        {"jam_gain_db", &SweepRow::jam_gain_db},
        {"malicious_sinr_db", &SweepRow::malicious_sinr_db},
        {"comm_gain_db", &SweepRow::comm_gain_db},
        {"sum_rate", &SweepRow::sum_rate},
        {"p_det_malicious", &SweepRow::p_det_malicious},
        {"p_det_isac", &SweepRow::p_det_isac},
    };

    std::vector<std::string> methods;
    std::vector<double> values;
    for (const auto& r : result.rows) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);
        if (std::find(values.begin(), values.end(), r.sweep_value) == values.end())
            values.push_back(r.sweep_value);
    }
    std::sort(values.begin(), values.end());

    for (const auto& metric : metrics) {
        std::string dat_path = out_dir + "/" + metric.name + ".dat";
        std::ofstream dat(dat_path, std::ios::binary);
        for (size_t mi = 0; mi < methods.size(); ++mi) {
            dat << "# " << methods[mi] << "\n";
            for (double v : values) {
                double sum = 0.0, sumsq = 0.0;
                int n = 0;
                for (const auto& r : result.rows) {
                    if (r.method != methods[mi] || r.sweep_value != v) continue;
                    double x = r.*(metric.field);
                    sum += x;
                    sumsq += x * x;
                    ++n;
                }
                if (n == 0) continue;
                double mean = sum / n;
                double var = n > 1 ? std::max(0.0, (sumsq - n * mean * mean) / (n - 1)) : 0.0;
                double se = n > 1 ? std::sqrt(var / n) : 0.0;
                dat << fmt(v) << " " << fmt(mean) << " " << fmt(se) << "\n";
            }
            if (mi + 1 < methods.size()) dat << "\n\n";
        }
        std::ofstream gp(out_dir + "/" + metric.name + ".gp", std::ios::binary);
        gp << "set terminal pngcairo size 800,600\n"
           << "set output '" << metric.name << ".png'\n"
           << "set xlabel 'sweep value'\n"
           << "set ylabel '" << metric.name << "'\n"
           << "set key outside\n"
           << "plot";
        for (size_t mi = 0; mi < methods.size(); ++mi) {
            gp << (mi ? ", " : " ") << "'" << metric.name << ".dat' index " << mi
               << " using 1:2:3 with yerrorlines title '" << methods[mi] << "'";
        }
        gp << "\n";
    }
}

}  // namespace starsim
