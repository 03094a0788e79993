#include "starsim/concealment.hpp"

#include <limits>
#include <random>
#include <stdexcept>

namespace starsim {

namespace {

double quad(const MatC& q, const VecC& psi) {
    return (psi.adjoint() * q * psi)(0, 0).real();
}

double trace_re(const MatC& q, const MatC& y) {
    return (q.transpose().cwiseProduct(y)).sum().real();
}

MatC lifted_gram(const MatC& a) {
    // ||psi^T a||^2 = psi^H conj(a a^H) psi
    return (a * a.adjoint()).conjugate();
}

}  // namespace

double ConcealmentProblem::numerator(const VecC& psi) const {
    return zeta_sq * p_d * d_abs_sq * d_abs_sq +
           zeta_sq * p_probe * d_abs_sq * quad(Q_s, psi);
}

double ConcealmentProblem::denominator(const VecC& psi) const {
    return sigma_d_sq + p_c * quad(Q_m, psi);
}

double ConcealmentProblem::gamma_sr(const VecC& psi) const {
    double num = p_probe * zeta_sq * r_abs_sq * quad(Q_s, psi) +
                 zeta_sq * p_d * d_abs_sq * r_abs_sq;
    double den = sigma_d_sq + p_d * h_rd_abs_sq + p_j * quad(Q_r, psi);
    return num / den;
}

double ConcealmentProblem::numerator_y(const MatC& Y) const {
    return zeta_sq * p_d * d_abs_sq * d_abs_sq +
           zeta_sq * p_probe * d_abs_sq * trace_re(Q_s, Y);
}

double ConcealmentProblem::denominator_y(const MatC& Y) const {
    return sigma_d_sq + p_c * trace_re(Q_m, Y);
}

ConcealmentProblem build_problem(const ChannelSet& ch, const ScenarioConfig& cfg) {
    const auto L = ch.G_b.rows();
    if (ch.f_t.cols() != L || ch.f_m.cols() != L || ch.f_r.cols() != L ||
        ch.G_j.rows() != L)
        throw std::invalid_argument("build_problem: dimension mismatch");
    double amp_t = std::sqrt(cfg.beta_t);
    MatC A_s = amp_t * ch.f_t.transpose().asDiagonal() * ch.G_b;
    MatC A_m = amp_t * ch.f_m.transpose().asDiagonal() * ch.G_b;
    MatC A_r = amp_t * ch.f_r.transpose().asDiagonal() * ch.G_j;

    ConcealmentProblem p;
    p.Q_s = lifted_gram(A_s);
    p.Q_m = lifted_gram(A_m);
    p.Q_r = lifted_gram(A_r);
    p.zeta_sq = cfg.zeta_sq;
    p.p_d = cfg.p_d;
    p.p_probe = cfg.p12_uses_pc ? cfg.p_c : cfg.p_s;
    p.p_c = cfg.p_c;
    p.p_j = cfg.p_j;
    p.sigma_d_sq = cfg.sigma_d_sq;
    p.d_abs_sq = std::norm(los_channel(ch.los_d));
    p.r_abs_sq = std::norm(los_channel(ch.los_r));
    p.h_rd_abs_sq = std::norm(ch.h_rd);
    p.gamma_min = cfg.gamma_min;
    return p;
}

SdpProblem parametric_sdp(const ConcealmentProblem& p, double lambda_s) {
    const int L = p.dim();
    SdpProblem sdp;
    sdp.dim = L;
    sdp.objective = p.zeta_sq * p.p_probe * p.d_abs_sq * p.Q_s -
                    lambda_s * p.p_c * p.Q_m;
    // Unit-diagonal lift of the unit-modulus constraints.
    for (int l = 0; l < L; ++l) {
        SdpConstraint c;
        c.a = MatC::Zero(L, L);
        c.a(l, l) = 1.0;
        c.sense = Sense::Eq;
        c.b = 1.0;
        sdp.constraints.push_back(std::move(c));
    }
    // Sensing floor, rearranged to a single linear trace inequality.
    SdpConstraint floor;
    floor.a = p.p_probe * p.zeta_sq * p.r_abs_sq * p.Q_s -
              p.gamma_min * p.p_j * p.Q_r;
    floor.sense = Sense::GreaterEq;
    floor.b = p.gamma_min * (p.sigma_d_sq + p.p_d * p.h_rd_abs_sq) -
              p.zeta_sq * p.p_d * p.d_abs_sq * p.r_abs_sq;
    sdp.constraints.push_back(std::move(floor));
    return sdp;
}

std::pair<MatC, DinkelbachState> dinkelbach_solve(const ConcealmentProblem& p,
                                                  const DinkelbachOptions& opts) {
    DinkelbachState st;
    // Feasibility pre-solve with zero objective.
    SdpProblem feas = parametric_sdp(p, 0.0);
    feas.objective.setZero();
    SdpSolution fsol = solve_sdp(feas, std::max(opts.sdp_tol, 1e-8));
    if (fsol.status == SdpStatus::infeasible) {
        st.feasible = false;
        st.termination = "infeasible";
        return {fsol.Y, st};
    }

    double lambda = opts.lambda0.value_or(
        p.gamma_sd(random_unit_phases(opts.seed, "dinkelbach_init", p.dim())));
    // A feasible relaxed ratio upper-bounds the optimum; starting at or above
    // it keeps the lambda trace nonincreasing.
    lambda = std::max(lambda, p.numerator_y(fsol.Y) / p.denominator_y(fsol.Y));

    MatC Y = fsol.Y;
    st.termination = "max_iter";
    for (int k = 0; k < opts.max_iter; ++k) {
        SdpProblem sub = parametric_sdp(p, lambda);
        SdpSolution sol = solve_sdp(sub, opts.sdp_tol);
        if (sol.status == SdpStatus::infeasible) {
            st.feasible = false;
            st.termination = "infeasible";
            break;
        }
        double N = p.numerator_y(sol.Y);
        double D = p.denominator_y(sol.Y);
        double F = N - lambda * D;
        st.iteration = k + 1;
        st.f_value = F;
        st.trace.push_back({k, lambda, F, sol.primal_residual});
        double lambda_next = N / D;
        if (lambda_next <= lambda) Y = sol.Y;
        if (std::abs(F) <= opts.tol * std::max(1.0, D) ||
            lambda_next >= lambda - opts.tol * std::max(1.0, std::abs(lambda))) {
            if (lambda_next < lambda) lambda = lambda_next;
            st.termination = "converged";
            break;
        }
        lambda = lambda_next;
    }
    st.lambda_s = lambda;
    return {Y, st};
}

ConcealmentSolution gaussian_randomization(const MatC& Y,
                                           const ConcealmentProblem& p,
                                           int n_samples, std::uint64_t seed) {
    const int L = p.dim();
    if (Y.rows() != L || Y.cols() != L)
        throw std::invalid_argument("gaussian_randomization: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (Y + Y.adjoint()));
    VecC evals_sqrt(L);
    for (int i = 0; i < L; ++i)
        evals_sqrt(i) = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    MatC factor = es.eigenvectors() * evals_sqrt.asDiagonal();

    auto project = [L](const VecC& z) {
        VecC psi(L);
        for (int l = 0; l < L; ++l) {
            double a = std::abs(z(l));
            psi(l) = (a > 0.0) ? z(l) / a : Complex(1.0, 0.0);
        }
        return psi;
    };

    std::mt19937_64 rng(substream_seed(seed, "randomization"));
    std::normal_distribution<double> n01(0.0, 1.0);
    const double feas_tol = p.gamma_min * (1.0 - 1e-7);

    ConcealmentSolution best;
    bool have_feasible = false;
    double best_gamma = std::numeric_limits<double>::infinity();
    double best_violation = std::numeric_limits<double>::infinity();

    auto consider = [&](const VecC& psi) {
        double gsr = p.gamma_sr(psi);
        double gsd = p.gamma_sd(psi);
        if (gsr >= feas_tol) {
            if (!have_feasible || gsd < best_gamma) {
                have_feasible = true;
                best_gamma = gsd;
                best.psi_t = psi;
                best.gamma_sd = gsd;
                best.gamma_sr = gsr;
            }
        } else if (!have_feasible) {
            double viol = p.gamma_min - gsr;
            if (viol < best_violation) {
                best_violation = viol;
                best.psi_t = psi;
                best.gamma_sd = gsd;
                best.gamma_sr = gsr;
            }
        }
    };

    // Candidate 0: phase-projected leading eigenvector.
    consider(project(es.eigenvectors().col(L - 1)));
    for (int s = 0; s < n_samples; ++s) {
        VecC w(L);
        for (int l = 0; l < L; ++l) {
            double re = n01(rng), im = n01(rng);
            w(l) = Complex(re, im) * M_SQRT1_2;
        }
        consider(project(factor * w));
    }

    best.feasible = have_feasible;
    best.report.solver = "gaussian_randomization";
    best.report.iterations = n_samples + 1;
    best.report.termination = have_feasible ? "converged" : "no_feasible_candidate";
    best.report.feasible = have_feasible;
    best.report.final_objective = best.gamma_sd;
    best.report.constraint_residual =
        have_feasible ? 0.0 : (p.gamma_min - best.gamma_sr);
    return best;
}

ConcealmentSolution solve_concealment(const ConcealmentProblem& p,
                                      const DinkelbachOptions& opts,
                                      int n_samples) {
    auto [Y, st] = dinkelbach_solve(p, opts);
    if (!st.feasible && st.termination == "infeasible") {
        ConcealmentSolution sol;
        sol.psi_t = VecC::Ones(p.dim());
        sol.gamma_sd = p.gamma_sd(sol.psi_t);
        sol.gamma_sr = p.gamma_sr(sol.psi_t);
        sol.relaxed_bound = 0.0;
        sol.feasible = false;
        sol.report.solver = "concealment";
        sol.report.termination = "infeasible";
        sol.report.feasible = false;
        return sol;
    }
    ConcealmentSolution sol = gaussian_randomization(Y, p, n_samples, opts.seed);
    sol.relaxed_bound = st.lambda_s;
    sol.report.solver = "concealment";
    sol.report.iterations = st.iteration;
    sol.report.termination =
        sol.feasible ? st.termination : "no_feasible_candidate";
    sol.report.feasible = sol.feasible && st.feasible;
    sol.report.final_objective = sol.gamma_sd;
    sol.report.trace = st.trace;
    return sol;
}

}  // namespace starsim
