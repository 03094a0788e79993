#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <random>

#include "starsim/channel_model.hpp"
#include "starsim/concealment.hpp"
#include "starsim/jamming.hpp"
#include "starsim/scenario.hpp"
#include "starsim/sdp.hpp"
#include "starsim/sweep.hpp"

namespace {

using namespace starsim;

int run_selftest() {
    int failures = 0;
    auto check = [&failures](const char* name, bool ok) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
        if (!ok) ++failures;
    };

    ScenarioConfig cfg;
    cfg.n_ris = 16;
    cfg.seed = 7;
    ChannelSet a = generate_channels(cfg);
    ChannelSet b = generate_channels(cfg);
    check("channel generation deterministic in seed",
          a.H == b.H && a.G_b == b.G_b && a.f_m == b.f_m && a.h_rd == b.h_rd);

    LosGeometry g{0.5, 0.7, -1.2};
    check("LoS channel modulus equals path gain",
          std::abs(std::abs(los_channel(g)) - 0.5) < 1e-12);

    check("detection probability closed-form points",
          std::abs(detection_probability(1.0) - 0.5) < 1e-12 &&
              std::abs(detection_probability(0.0) - std::exp(-1.0)) < 1e-12 &&
              std::abs(detection_probability(3.0) - std::pow(4.0, -1.0 / 3.0)) < 1e-12);

    {
        StarRisState ris = StarRisState::from_phases(
            random_unit_phases(3, "t", 16), random_unit_phases(3, "r", 16),
            cfg.beta_t, cfg.beta_r);
        auto eff = compose_effective(a, ris);
        double r1 = sum_rate(eff.H_eff, eff.J_eff, cfg.p_c, cfg.p_j, cfg.sigma_n_sq);
        check("sum rate finite and nonnegative", std::isfinite(r1) && r1 >= 0.0);
    }

    {
        PenaltyProblem p = PenaltyProblem::from_channels(a, cfg, 1.0);
        ManifoldPoint x{random_unit_phases(5, "x", 16)};
        VecC eg = euclidean_gradient(p, x);
        VecC rg = riemannian_gradient(x, eg);
        VecC v = riemannian_gradient(x, random_unit_phases(9, "v", 16));
        double h = 1e-6;
        double fp = penalty_objective(p, retract(x, v, h));
        double fm = penalty_objective(p, retract(x, v, -h));
        double fd = (fp - fm) / (2.0 * h);
        double an = 2.0 * rg.dot(v).real();
        double scale = std::max({std::abs(fd), std::abs(an), 1e-300});
        check("penalty gradient matches finite differences",
              std::abs(fd - an) / scale < 1e-5);
        double tangency = 0.0;
        for (int l = 0; l < 16; ++l)
            tangency = std::max(tangency,
                                std::abs((std::conj(x.psi_r(l)) * rg(l)).real()));
        check("Riemannian gradient tangent", tangency < 1e-10 * (1.0 + eg.norm()));
    }

    {
        SdpProblem sdp;
        sdp.dim = 3;
        sdp.objective = MatC::Zero(3, 3);
        sdp.objective(0, 0) = 2.0;
        sdp.objective(1, 1) = 1.0;
        sdp.objective(2, 2) = 3.0;
        SdpConstraint tr;
        tr.a = MatC::Identity(3, 3);
        tr.sense = Sense::Eq;
        tr.b = 1.0;
        sdp.constraints.push_back(tr);
        SdpSolution sol = solve_sdp(sdp);
        check("SDP minimum-eigenvalue instance",
              sol.status == SdpStatus::optimal &&
                  std::abs(sol.objective_value - 1.0) < 1e-6);
    }

    std::printf("%s\n", failures ? "selftest: FAILURES" : "selftest: all passed");
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"STAR-RIS ISAC network simulator and optimizer"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Monte-Carlo sweep over a scenario");
    std::string config_path, sweep_var = "n_jam", out_dir = "out";
    std::vector<double> values = {2, 4, 6, 8};
    std::vector<std::string> method_names = {"safe_isac", "random_phase_star",
                                             "reflect_only_ris"};
    int trials = 100, threads = 0;
    std::uint64_t seed = 1;
    bool seed_given = false, timings = false;
    run->add_option("--config", config_path, "scenario config file");
    run->add_option("--sweep", sweep_var, "sweep variable: n_jam|detector_distance|n_ris");
    run->add_option("--values", values, "sweep values")->delimiter(',');
    run->add_option("--trials", trials, "Monte-Carlo trials per sweep point");
    run->add_option("--methods", method_names, "methods to compare")->delimiter(',');
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "base RNG seed")->each([&](const std::string&) {
        seed_given = true;
    });
    run->add_option("--threads", threads, "worker threads (0 = hardware)");
    run->add_flag("--timings", timings,
                  "record wall times per trial (breaks byte-determinism of the CSV)");

    // selftest
    auto* selftest = app.add_subcommand("selftest", "run built-in sanity checks");

    // plot
    auto* plot = app.add_subcommand("plot", "render plot files from a sweep CSV");
    std::string csv_path, plot_out = "plots";
    plot->add_option("--csv", csv_path, "input CSV")->required();
    plot->add_option("--out", plot_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc ? 1 : 0;
    }

    try {
        if (*selftest) return run_selftest();

        if (*plot) {
            SweepResult result;
            try {
                result = read_csv(csv_path);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 3;
            }
            emit_plots(result, plot_out);
            return 0;
        }

        // run
        SweepSpec spec;
        try {
            if (!config_path.empty()) spec.base = load_config(config_path);
            spec.variable = parse_sweep_variable(sweep_var);
            spec.values = values;
            std::sort(spec.values.begin(), spec.values.end());
            spec.n_trials = trials;
            spec.methods.clear();
            for (const auto& m : method_names) spec.methods.push_back(parse_method(m));
            spec.seed_base = seed_given ? seed : spec.base.seed;
            spec.validate();
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 1;
        }

        SweepResult result = run_sweep(spec, threads, timings);
        try {
            std::error_code ec;
            std::filesystem::create_directories(out_dir, ec);
            write_csv(result, out_dir + "/results.csv");
            emit_plots(result, out_dir);
        } catch (const std::exception& e) {
            std::cerr << "I/O error: " << e.what() << "\n";
            return 3;
        }
        bool any_feasible = false;
        for (const auto& r : result.rows) any_feasible |= r.feasible_flag;
        if (!any_feasible) {
            std::cerr << "all trials infeasible\n";
            return 2;
        }
        std::cout << "wrote " << result.rows.size() << " rows to " << out_dir
                  << "/results.csv\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
