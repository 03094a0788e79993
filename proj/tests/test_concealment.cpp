#include <doctest.h>

#include <random>

#include "starsim/channel_model.hpp"
#include "starsim/concealment.hpp"

using namespace starsim;

namespace {

VecC random_unit_modulus(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    VecC v(n);
    for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, u(rng));
    return v;
}

MatC random_psd(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> n01;
    MatC a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = Complex(n01(rng), n01(rng));
    return (a * a.adjoint()).conjugate();
}

// Small, O(1)-scale instance for solver tests.
ConcealmentProblem toy_problem(std::mt19937_64& rng, int n) {
    ConcealmentProblem p;
    p.Q_s = random_psd(rng, n);
    p.Q_m = random_psd(rng, n);
    p.Q_r = random_psd(rng, n);
    p.zeta_sq = 1.0;
    p.p_d = 0.5;
    p.p_probe = 1.0;
    p.p_c = 1.0;
    p.p_j = 0.25;
    p.sigma_d_sq = 1.0;
    p.d_abs_sq = 0.5;
    p.r_abs_sq = 0.5;
    p.h_rd_abs_sq = 0.1;
    p.gamma_min = 1e-3;
    return p;
}

}  // namespace

TEST_CASE("quadratic forms reproduce the effective sensing channel norms") {
    ScenarioConfig cfg;
    cfg.n_ris = 12;
    cfg.seed = 71;
    ChannelSet ch = generate_channels(cfg);
    ConcealmentProblem p = build_problem(ch, cfg);
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 100; ++rep) {
        VecC psi_t = random_unit_modulus(rng, cfg.n_ris);
        StarRisState ris = StarRisState::from_phases(
            psi_t, VecC::Ones(cfg.n_ris), cfg.beta_t, cfg.beta_r);
        EffectiveChannels eff = compose_effective(ch, ris);
        double qs = (psi_t.adjoint() * p.Q_s * psi_t)(0, 0).real();
        double qm = (psi_t.adjoint() * p.Q_m * psi_t)(0, 0).real();
        double qr = (psi_t.adjoint() * p.Q_r * psi_t)(0, 0).real();
        CHECK(qs == doctest::Approx(eff.h_s.squaredNorm()).epsilon(1e-10));
        CHECK(qm == doctest::Approx(eff.i_eff.squaredNorm()).epsilon(1e-10));
        CHECK(qr == doctest::Approx(eff.h_rj.squaredNorm()).epsilon(1e-10));
    }
}

TEST_CASE("problem ratios agree with the SINR evaluations") {
    ScenarioConfig cfg;
    cfg.n_ris = 10;
    cfg.seed = 73;
    ChannelSet ch = generate_channels(cfg);
    ConcealmentProblem p = build_problem(ch, cfg);
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        VecC psi_t = random_unit_modulus(rng, cfg.n_ris);
        StarRisState ris = StarRisState::from_phases(
            psi_t, random_unit_modulus(rng, cfg.n_ris), cfg.beta_t, cfg.beta_r);
        EffectiveChannels eff = compose_effective(ch, ris);
        CHECK(p.gamma_sd(psi_t) ==
              doctest::Approx(sinr_malicious(ch, eff, cfg)).epsilon(1e-10));
        CHECK(p.gamma_sr(psi_t) ==
              doctest::Approx(sinr_isac(ch, eff, cfg)).epsilon(1e-10));
    }

    SUBCASE("ratios are invariant to a global phase") {
        VecC psi_t = random_unit_modulus(rng, cfg.n_ris);
        VecC rotated = std::polar(1.0, 1.234) * psi_t;
        CHECK(p.gamma_sd(rotated) ==
              doctest::Approx(p.gamma_sd(psi_t)).epsilon(1e-12));
        CHECK(p.gamma_sr(rotated) ==
              doctest::Approx(p.gamma_sr(psi_t)).epsilon(1e-12));
    }
}

TEST_CASE("lifted ratios match the vector ratios on rank-one matrices") {
    std::mt19937_64 rng(13);
    ConcealmentProblem p = toy_problem(rng, 6);
    for (int rep = 0; rep < 20; ++rep) {
        VecC psi = random_unit_modulus(rng, 6);
        MatC Y = psi * psi.adjoint();
        CHECK(p.numerator_y(Y) == doctest::Approx(p.numerator(psi)).epsilon(1e-12));
        CHECK(p.denominator_y(Y) ==
              doctest::Approx(p.denominator(psi)).epsilon(1e-12));
    }
}

TEST_CASE("parametric subproblem structure") {
    std::mt19937_64 rng(17);
    int n = 5;
    ConcealmentProblem p = toy_problem(rng, n);
    double lambda = 0.7;
    SdpProblem sdp = parametric_sdp(p, lambda);
    REQUIRE(sdp.dim == n);
    REQUIRE(static_cast<int>(sdp.constraints.size()) == n + 1);
    for (int l = 0; l < n; ++l) {
        const auto& c = sdp.constraints[l];
        CHECK(c.sense == Sense::Eq);
        CHECK(c.b == 1.0);
        CHECK(c.a(l, l) == Complex(1.0, 0.0));
        CHECK(c.a.norm() == doctest::Approx(1.0));
    }

    // The floor inequality at a lifted rank-one point is equivalent to the
    // original SINR constraint gamma_sr(psi) >= gamma_min.
    for (int rep = 0; rep < 50; ++rep) {
        VecC psi = random_unit_modulus(rng, n);
        MatC Y = psi * psi.adjoint();
        const auto& f = sdp.constraints[n];
        double lhs = (f.a.transpose().cwiseProduct(Y)).sum().real();
        bool floor_ok = lhs >= f.b - 1e-12 * (1.0 + std::abs(f.b));
        bool sinr_ok = p.gamma_sr(psi) >= p.gamma_min * (1.0 - 1e-12);
        CHECK(floor_ok == sinr_ok);
    }

    // The parametric objective at Y differs from N(Y) - lambda*D(Y) only by a
    // Y-independent constant.
    VecC psi1 = random_unit_modulus(rng, n);
    VecC psi2 = random_unit_modulus(rng, n);
    MatC Y1 = psi1 * psi1.adjoint(), Y2 = psi2 * psi2.adjoint();
    auto obj = [&](const MatC& Y) {
        return (sdp.objective.transpose().cwiseProduct(Y)).sum().real();
    };
    auto frac = [&](const MatC& Y) {
        return p.numerator_y(Y) - lambda * p.denominator_y(Y);
    };
    CHECK(obj(Y1) - obj(Y2) == doctest::Approx(frac(Y1) - frac(Y2)).epsilon(1e-10));
}

TEST_CASE("constant-ratio instances converge in at most two iterations") {
    // With Q_s and Q_m proportional to I and unit diagonals forcing
    // Tr(Y) = L, the ratio N/D is the same for every feasible Y.
    int n = 4;
    ConcealmentProblem p;
    p.Q_s = MatC::Identity(n, n);
    p.Q_m = MatC::Identity(n, n);
    p.Q_r = MatC::Identity(n, n);
    p.zeta_sq = 1.0;
    p.p_d = 1.0;
    p.p_probe = 1.0;
    p.p_c = 1.0;
    p.p_j = 1.0;
    p.sigma_d_sq = 2.0;
    p.d_abs_sq = 1.0;
    p.r_abs_sq = 1.0;
    p.h_rd_abs_sq = 0.0;
    p.gamma_min = 1e-6;

    double ratio = (1.0 + double(n)) / (2.0 + double(n));
    auto [Y, st] = dinkelbach_solve(p);
    CHECK(st.feasible);
    CHECK(st.termination == "converged");
    CHECK(st.iteration <= 2);
    CHECK(st.lambda_s == doctest::Approx(ratio).epsilon(1e-6));
}

TEST_CASE("Dinkelbach lambda trace is nonincreasing") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 5; ++rep) {
        ConcealmentProblem p = toy_problem(rng, 5);
        auto [Y, st] = dinkelbach_solve(p);
        REQUIRE(st.feasible);
        REQUIRE(!st.trace.empty());
        for (std::size_t k = 1; k < st.trace.size(); ++k)
            CHECK(st.trace[k].objective <=
                  st.trace[k - 1].objective * (1.0 + 1e-12) + 1e-15);
        // Returned Y must be feasible for the relaxation: unit diagonal, PSD.
        for (int l = 0; l < 5; ++l)
            CHECK(Y(l, l).real() == doctest::Approx(1.0).epsilon(1e-5));
        Eigen::SelfAdjointEigenSolver<MatC> es(Y);
        CHECK(es.eigenvalues().minCoeff() > -1e-6);
    }
}

TEST_CASE("randomization recovers the phase vector from a rank-one lift") {
    std::mt19937_64 rng(23);
    ConcealmentProblem p = toy_problem(rng, 8);
    p.gamma_min = 0.0;  // everything feasible
    VecC psi = random_unit_modulus(rng, 8);
    MatC Y = psi * psi.adjoint();
    ConcealmentSolution sol = gaussian_randomization(Y, p, 50, 5);
    REQUIRE(sol.feasible);
    // Candidate 0 is the projected leading eigenvector = psi up to global phase.
    CHECK(sol.gamma_sd <= p.gamma_sd(psi) * (1.0 + 1e-9));
    Complex align = (sol.psi_t.adjoint() * psi)(0, 0);
    CHECK(std::abs(align) == doctest::Approx(8.0).epsilon(1e-8));
}

TEST_CASE("randomization is deterministic in the seed") {
    std::mt19937_64 rng(29);
    ConcealmentProblem p = toy_problem(rng, 6);
    p.gamma_min = 1e-4;
    MatC Y = random_psd(rng, 6);
    Y *= 6.0 / Y.trace().real();
    ConcealmentSolution a = gaussian_randomization(Y, p, 200, 42);
    ConcealmentSolution b = gaussian_randomization(Y, p, 200, 42);
    CHECK(a.psi_t == b.psi_t);
    CHECK(a.gamma_sd == b.gamma_sd);
}

TEST_CASE("an unsatisfiable sensing floor is reported infeasible") {
    std::mt19937_64 rng(31);
    ConcealmentProblem p = toy_problem(rng, 5);
    p.gamma_min = 1e9;
    ConcealmentSolution sol = solve_concealment(p);
    CHECK_FALSE(sol.feasible);
    CHECK_FALSE(sol.report.feasible);
}

TEST_CASE("two-element instance against a dense phase grid") {
    std::mt19937_64 rng(37);
    ConcealmentProblem p = toy_problem(rng, 2);

    // One phase is free by global-phase invariance; sweep the other.
    auto at = [&](double phi) {
        VecC psi(2);
        psi << Complex(1.0, 0.0), std::polar(1.0, phi);
        return psi;
    };
    const int grid = 20000;
    double gsr_max = 0.0;
    for (int k = 0; k < grid; ++k)
        gsr_max = std::max(gsr_max, p.gamma_sr(at(2.0 * M_PI * k / grid)));
    p.gamma_min = 0.6 * gsr_max;  // active but satisfiable floor

    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid; ++k) {
        VecC psi = at(2.0 * M_PI * k / grid);
        if (p.gamma_sr(psi) >= p.gamma_min) best = std::min(best, p.gamma_sd(psi));
    }
    REQUIRE(std::isfinite(best));

    ConcealmentSolution sol = solve_concealment(p, {}, 2000);
    REQUIRE(sol.feasible);
    CHECK(sol.gamma_sr >= p.gamma_min * (1.0 - 1e-6));
    CHECK(sol.gamma_sd <= best * (1.0 + 1e-3));
    // The relaxation bounds the constrained minimum from below.
    CHECK(sol.relaxed_bound <= best * (1.0 + 1e-6));
    CHECK(sol.relaxed_bound <= sol.gamma_sd * (1.0 + 1e-6));
}

TEST_CASE("relaxed bound never exceeds the recovered objective") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 5; ++rep) {
        ConcealmentProblem p = toy_problem(rng, 6);
        ConcealmentSolution sol = solve_concealment(p);
        if (!sol.feasible) continue;
        CHECK(sol.relaxed_bound <= sol.gamma_sd * (1.0 + 1e-6) + 1e-12);
    }
}

TEST_CASE("built problems expose the configured powers") {
    ScenarioConfig cfg;
    cfg.n_ris = 8;
    cfg.seed = 79;
    ChannelSet ch = generate_channels(cfg);
    ConcealmentProblem p = build_problem(ch, cfg);
    CHECK(p.p_probe == cfg.p_s);
    CHECK(p.p_c == cfg.p_c);
    CHECK(p.gamma_min == cfg.gamma_min);

    ScenarioConfig alt = cfg;
    alt.p12_uses_pc = true;
    ConcealmentProblem p2 = build_problem(ch, alt);
    CHECK(p2.p_probe == cfg.p_c);
}
