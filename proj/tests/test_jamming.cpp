#include <doctest.h>

#include <random>

#include "starsim/channel_model.hpp"
#include "starsim/jamming.hpp"

using namespace starsim;

namespace {

MatC randn(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> n01;
    MatC m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = Complex(n01(rng), n01(rng));
    return m;
}

VecC random_unit_modulus(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    VecC v(n);
    for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, u(rng));
    return v;
}

// O(1)-scale instance with K users, N tx, Nj jammer antennas, L elements.
PenaltyProblem toy_problem(std::mt19937_64& rng, int K, int N, int Nj, int L,
                           double lambda_r) {
    PenaltyProblem p;
    p.J = randn(rng, K, Nj);
    p.H = randn(rng, K, N);
    p.F_c = randn(rng, K, L);
    p.G_j = randn(rng, L, Nj);
    p.G_b = randn(rng, L, N);
    p.g_th = 1.0;
    p.lambda_r = lambda_r;
    p.amp_r = 0.8;
    return p;
}

}  // namespace

TEST_CASE("objective without the penalty term is the jamming gain") {
    std::mt19937_64 rng(51);
    PenaltyProblem p = toy_problem(rng, 3, 4, 2, 6, 0.0);
    ManifoldPoint x{random_unit_modulus(rng, 6)};
    MatC fc_psi = p.F_c * (p.amp_r * x.psi_r).asDiagonal();
    double jam = (p.J + fc_psi * p.G_j).squaredNorm();
    CHECK(penalty_objective(p, x) == doctest::Approx(jam).epsilon(1e-12));
}

TEST_CASE("objective matches the effective-channel norms on real channels") {
    ScenarioConfig cfg;
    cfg.n_ris = 10;
    cfg.seed = 83;
    ChannelSet ch = generate_channels(cfg);
    PenaltyProblem p = PenaltyProblem::from_channels(ch, cfg, 2.5);
    std::mt19937_64 rng(53);
    VecC psi_r = random_unit_modulus(rng, 10);
    StarRisState ris = StarRisState::from_phases(VecC::Ones(10), psi_r,
                                                 cfg.beta_t, cfg.beta_r);
    MatC H_eff, J_eff;
    effective_comm_channels(ch, ris, H_eff, J_eff);
    double expected = J_eff.squaredNorm() +
                      2.5 * (cfg.g_th - H_eff.squaredNorm());
    CHECK(penalty_objective(p, {psi_r}) ==
          doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("gradient matches central finite differences") {
    std::mt19937_64 rng(57);
    for (int rep = 0; rep < 10; ++rep) {
        double lam = (rep % 2) ? 1.7 : 0.0;
        PenaltyProblem p = toy_problem(rng, 3, 5, 2, 8, lam);
        ManifoldPoint x{random_unit_modulus(rng, 8)};
        VecC eg = euclidean_gradient(p, x);
        VecC v = riemannian_gradient(x, randn(rng, 8, 1).col(0));
        double h = 1e-6;
        double fp = penalty_objective(p, retract(x, v, h));
        double fm = penalty_objective(p, retract(x, v, -h));
        double fd = (fp - fm) / (2.0 * h);
        double an = 2.0 * eg.dot(v).real();
        CHECK(fd == doctest::Approx(an).epsilon(1e-5).scale(1.0 + std::abs(an)));
    }
}

TEST_CASE("tangent projection is idempotent and tangent") {
    std::mt19937_64 rng(59);
    ManifoldPoint x{random_unit_modulus(rng, 12)};
    VecC e = randn(rng, 12, 1).col(0);
    VecC t1 = riemannian_gradient(x, e);
    VecC t2 = riemannian_gradient(x, t1);
    CHECK((t1 - t2).norm() < 1e-12 * (1.0 + t1.norm()));
    for (int l = 0; l < 12; ++l)
        CHECK(std::abs((std::conj(x.psi_r(l)) * t1(l)).real()) <
              1e-12 * (1.0 + e.norm()));
}

TEST_CASE("retraction stays on the manifold and is first order") {
    std::mt19937_64 rng(61);
    ManifoldPoint x{random_unit_modulus(rng, 10)};
    VecC v = riemannian_gradient(x, randn(rng, 10, 1).col(0));

    ManifoldPoint r0 = retract(x, v, 0.0);
    CHECK((r0.psi_r - x.psi_r).norm() < 1e-15);

    for (double t : {0.3, 1e-3}) {
        ManifoldPoint rt = retract(x, v, t);
        for (int l = 0; l < 10; ++l)
            CHECK(std::abs(std::abs(rt.psi_r(l)) - 1.0) < 1e-12);
    }

    // ||R(x, tv) - (x + tv)|| = O(t^2): the log-log slope should be ~2.
    double t1 = 1e-3, t2 = 1e-4;
    double e1 = (retract(x, v, t1).psi_r - (x.psi_r + t1 * v)).norm();
    double e2 = (retract(x, v, t2).psi_r - (x.psi_r + t2 * v)).norm();
    double slope = std::log(e1 / e2) / std::log(t1 / t2);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("a constant objective stops at the start") {
    std::mt19937_64 rng(67);
    PenaltyProblem p = toy_problem(rng, 3, 4, 2, 6, 0.0);
    p.J.setZero();
    p.G_j.setZero();
    ManifoldPoint x0{random_unit_modulus(rng, 6)};
    auto [x, rep] = pr_cg_solve(p, x0);
    CHECK(rep.termination == "gradient_converged");
    CHECK(rep.iterations == 0);
    CHECK((x.psi_r - x0.psi_r).norm() < 1e-12);
}

TEST_CASE("accepted steps never increase the objective") {
    std::mt19937_64 rng(71);
    PenaltyProblem p = toy_problem(rng, 4, 6, 3, 12, 0.9);
    ManifoldPoint x0{random_unit_modulus(rng, 12)};
    std::vector<double> objectives;
    CgOptions opts;
    opts.observer = [&](const CgState& st) { objectives.push_back(st.objective); };
    auto [x, rep] = pr_cg_solve(p, x0, opts);
    REQUIRE(objectives.size() >= 2);
    double f0 = penalty_objective(p, x0);
    CHECK(objectives.front() <= f0 + 1e-9 * (1.0 + std::abs(f0)));
    for (std::size_t i = 1; i < objectives.size(); ++i)
        CHECK(objectives[i] <=
              objectives[i - 1] + 1e-9 * (1.0 + std::abs(objectives[i - 1])));
    CHECK(rep.final_objective ==
          doctest::Approx(penalty_objective(p, x)).epsilon(1e-10));
}

TEST_CASE("near-stationary final gradient on an unconstrained instance") {
    std::mt19937_64 rng(73);
    PenaltyProblem p = toy_problem(rng, 3, 4, 2, 8, 0.0);
    ManifoldPoint x0{random_unit_modulus(rng, 8)};
    CgOptions opts;
    opts.grad_tol = 1e-8;
    opts.f_tol = 1e-16;
    opts.max_iter = 5000;
    auto [x, rep] = pr_cg_solve(p, x0, opts);
    double scale = p.J.squaredNorm() + p.H.squaredNorm();
    VecC rg = riemannian_gradient(x, euclidean_gradient(p, x));
    CHECK(rg.norm() / scale < 1e-6);
}

TEST_CASE("single-element instance against a dense phase grid") {
    std::mt19937_64 rng(79);
    PenaltyProblem p = toy_problem(rng, 3, 4, 2, 1, 0.0);
    double best = std::numeric_limits<double>::infinity();
    const int grid = 20000;
    for (int k = 0; k < grid; ++k) {
        VecC psi(1);
        psi(0) = std::polar(1.0, 2.0 * M_PI * k / grid);
        best = std::min(best, penalty_objective(p, {psi}));
    }
    CgOptions opts;
    opts.restarts = 4;
    ManifoldPoint x0{random_unit_modulus(rng, 1)};
    auto [x, rep] = pr_cg_solve(p, x0, opts);
    CHECK(rep.final_objective <= best + 1e-6 * std::abs(best) + 1e-9);
}

TEST_CASE("two-element instance against a dense phase grid") {
    std::mt19937_64 rng(83);
    PenaltyProblem p = toy_problem(rng, 2, 3, 2, 2, 0.4);
    double best = std::numeric_limits<double>::infinity();
    const int grid = 600;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b) {
            VecC psi(2);
            psi << std::polar(1.0, 2.0 * M_PI * a / grid),
                std::polar(1.0, 2.0 * M_PI * b / grid);
            best = std::min(best, penalty_objective(p, {psi}));
        }
    CgOptions opts;
    opts.restarts = 8;
    ManifoldPoint x0{random_unit_modulus(rng, 2)};
    auto [x, rep] = pr_cg_solve(p, x0, opts);
    // The grid minimum is itself off by O(grid step)^2.
    CHECK(rep.final_objective <= best + 1e-3 * std::abs(best) + 1e-9);
}

TEST_CASE("full reflection solve on a generated scenario") {
    ScenarioConfig cfg;
    cfg.n_ris = 24;
    cfg.seed = 1;
    ChannelSet ch = generate_channels(cfg);
    auto [x, rep] = solve_p2(ch, cfg);
    REQUIRE(rep.feasible);
    CHECK(rep.termination == "converged");

    StarRisState ris = StarRisState::from_phases(VecC::Ones(24), x.psi_r,
                                                 cfg.beta_t, cfg.beta_r);
    MatC H_eff, J_eff;
    effective_comm_channels(ch, ris, H_eff, J_eff);
    CHECK(H_eff.squaredNorm() >= cfg.g_th * (1.0 - 1e-6));
    CHECK(rep.final_objective ==
          doctest::Approx(J_eff.squaredNorm()).epsilon(1e-10));

    // Determinism of the full chain.
    auto [x2, rep2] = solve_p2(ch, cfg);
    CHECK(x.psi_r == x2.psi_r);
}

TEST_CASE("vacuous gain floor is always satisfiable") {
    ScenarioConfig cfg;
    cfg.n_ris = 8;
    cfg.seed = 5;
    cfg.g_th = 1e-300;
    ChannelSet ch = generate_channels(cfg);
    auto [x, rep] = solve_p2(ch, cfg);
    CHECK(rep.feasible);
    CHECK(rep.constraint_residual == 0.0);
}

TEST_CASE("an unreachable gain floor exhausts the penalty loop") {
    ScenarioConfig cfg;
    cfg.n_ris = 8;
    cfg.seed = 5;
    cfg.g_th = 1e12;
    ChannelSet ch = generate_channels(cfg);
    auto [x, rep] = solve_p2(ch, cfg);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.termination == "infeasible_after_penalty_cap");
    CHECK(rep.constraint_residual > 0.0);
}
