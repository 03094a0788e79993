#include "starsim/jamming.hpp"

#include <stdexcept>

namespace starsim {

namespace {

double inner(const VecC& a, const VecC& b) { return a.dot(b).real(); }

VecC normalize_phases(const VecC& v) {
    VecC out(v.size());
    for (Eigen::Index l = 0; l < v.size(); ++l) {
        double a = std::abs(v(l));
        out(l) = (a > 0.0) ? v(l) / a : Complex(1.0, 0.0);
    }
    return out;
}

struct Evaluated {
    double f = 0.0;       // normalized objective
    VecC rgrad;           // normalized Riemannian gradient
};

}  // namespace

PenaltyProblem PenaltyProblem::from_channels(const ChannelSet& ch,
                                             const ScenarioConfig& cfg,
                                             double lambda_r) {
    PenaltyProblem p;
    p.J = ch.J;
    p.H = ch.H;
    p.F_c = ch.F_c;
    p.G_j = ch.G_j;
    p.G_b = ch.G_b;
    p.g_th = cfg.g_th;
    p.lambda_r = lambda_r;
    p.amp_r = std::sqrt(cfg.beta_r);
    return p;
}

double penalty_objective(const PenaltyProblem& p, const ManifoldPoint& x) {
    MatC fc_psi = p.F_c * (p.amp_r * x.psi_r).asDiagonal();
    double jam = (p.J + fc_psi * p.G_j).squaredNorm();
    double comm = (p.H + fc_psi * p.G_b).squaredNorm();
    double pen = p.g_th - comm;
    if (p.clip_penalty && pen < 0.0) pen = 0.0;
    return jam + p.lambda_r * pen;
}

VecC euclidean_gradient(const PenaltyProblem& p, const ManifoldPoint& x) {
    MatC fc_psi = p.F_c * (p.amp_r * x.psi_r).asDiagonal();
    MatC J_eff = p.J + fc_psi * p.G_j;
    MatC H_eff = p.H + fc_psi * p.G_b;
    // g_l = amp_r * (F_c[:,l]^H J_eff G_j[l,:]^H - lambda F_c[:,l]^H H_eff G_b[l,:]^H)
    MatC mj = p.F_c.adjoint() * J_eff;  // L x Nj
    VecC g = (mj.cwiseProduct(p.G_j.conjugate())).rowwise().sum();
    bool pen_active = !p.clip_penalty || (p.g_th - H_eff.squaredNorm()) > 0.0;
    if (pen_active && p.lambda_r != 0.0) {
        MatC mh = p.F_c.adjoint() * H_eff;  // L x N
        g -= p.lambda_r * (mh.cwiseProduct(p.G_b.conjugate())).rowwise().sum();
    }
    return p.amp_r * g;
}

VecC riemannian_gradient(const ManifoldPoint& x, const VecC& egrad) {
    VecC out(egrad.size());
    for (Eigen::Index l = 0; l < egrad.size(); ++l) {
        double radial = (std::conj(egrad(l)) * x.psi_r(l)).real();
        out(l) = egrad(l) - radial * x.psi_r(l);
    }
    return out;
}

ManifoldPoint retract(const ManifoldPoint& x, const VecC& v, double t) {
    ManifoldPoint out;
    out.psi_r.resize(x.psi_r.size());
    for (Eigen::Index l = 0; l < x.psi_r.size(); ++l) {
        Complex z = x.psi_r(l) + t * v(l);
        double a = std::abs(z);
        out.psi_r(l) = (a > 0.0) ? z / a : x.psi_r(l);
    }
    return out;
}

namespace {

std::pair<ManifoldPoint, SolveReport> run_cg(const PenaltyProblem& p,
                                             const ManifoldPoint& start,
                                             const CgOptions& opts,
                                             double scale) {
    const Eigen::Index L = start.psi_r.size();
    ManifoldPoint x{normalize_phases(start.psi_r)};

    auto eval = [&](const ManifoldPoint& pt) {
        Evaluated e;
        e.f = penalty_objective(p, pt) / scale;
        e.rgrad = riemannian_gradient(pt, euclidean_gradient(p, pt) / scale);
        return e;
    };
    auto value = [&](const ManifoldPoint& pt) {
        return penalty_objective(p, pt) / scale;
    };

    SolveReport rep;
    rep.solver = "pr_cg";
    Evaluated cur = eval(x);
    VecC d = -cur.rgrad;
    double gg = inner(cur.rgrad, cur.rgrad);
    rep.termination = "max_iter";
    bool prev_ls_fail = false;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        if (std::sqrt(gg) <= opts.grad_tol) {
            rep.termination = "gradient_converged";
            break;
        }
        double slope = 2.0 * inner(cur.rgrad, d);
        double beta_used = 0.0;
        if (!(slope < 0.0)) {  // not a descent direction
            d = -cur.rgrad;
            slope = -2.0 * gg;
        }
        // Armijo backtracking along the retracted curve.
        double t = opts.step0;
        ManifoldPoint xn;
        double fn = 0.0;
        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            double tt = opts.step0;
            for (int bt = 0; bt < opts.max_backtracks; ++bt) {
                ManifoldPoint cand = retract(x, d, tt);
                double fc = value(cand);
                if (fc <= cur.f + opts.armijo_c1 * tt * slope) {
                    xn = std::move(cand);
                    fn = fc;
                    t = tt;
                    accepted = true;
                    break;
                }
                tt *= opts.shrink;
            }
            if (!accepted) {
                if (prev_ls_fail) break;
                prev_ls_fail = true;
                d = -cur.rgrad;  // reset and retry once
                slope = -2.0 * gg;
            }
        }
        if (!accepted) {
            rep.termination = "line_search_failure";
            break;
        }

        Evaluated nxt = eval(xn);
        // Polak-Ribiere with projection transport; periodic reset.
        VecC tg = riemannian_gradient(xn, cur.rgrad);
        VecC td = riemannian_gradient(xn, d);
        double beta = 0.0;
        if ((it + 1) % L != 0 && gg > 0.0)
            beta = inner(nxt.rgrad, nxt.rgrad - tg) / gg;
        beta_used = beta;
        VecC dn = -nxt.rgrad + beta * td;

        double df = cur.f - fn;
        double gg_n = inner(nxt.rgrad, nxt.rgrad);
        rep.trace.push_back({it, fn * scale, std::sqrt(gg_n), t});
        if (opts.observer) {
            CgState st;
            st.point = xn;
            st.riem_grad = nxt.rgrad;
            st.direction = dn;
            st.beta_pr = beta_used;
            st.step = t;
            st.objective = fn * scale;
            st.iteration = it + 1;
            opts.observer(st);
        }
        x = std::move(xn);
        cur = std::move(nxt);
        d = std::move(dn);
        gg = gg_n;
        prev_ls_fail = false;
        if (df <= opts.f_tol) {
            rep.termination = "objective_converged";
            ++it;
            break;
        }
    }
    rep.iterations = it;
    rep.final_objective = cur.f * scale;
    return {std::move(x), std::move(rep)};
}

}  // namespace

std::pair<ManifoldPoint, SolveReport> pr_cg_solve(const PenaltyProblem& p,
                                                  const ManifoldPoint& x0,
                                                  const CgOptions& opts) {
    if (x0.psi_r.size() != p.F_c.cols())
        throw std::invalid_argument("pr_cg_solve: starting point dimension mismatch");
    double scale = p.J.squaredNorm() + p.H.squaredNorm();
    if (!(scale > 0.0)) scale = 1.0;

    auto best = run_cg(p, x0, opts, scale);
    for (int r = 1; r < opts.restarts; ++r) {
        ManifoldPoint xr{random_unit_phases(opts.seed, "cg_restart_" + std::to_string(r),
                                            static_cast<int>(x0.psi_r.size()))};
        auto trial = run_cg(p, xr, opts, scale);
        if (trial.second.final_objective < best.second.final_objective)
            best = std::move(trial);
    }
    return best;
}

std::pair<ManifoldPoint, SolveReport> solve_p2(const ChannelSet& ch,
                                               const ScenarioConfig& cfg,
                                               const CgOptions& opts) {
    PenaltyProblem p = PenaltyProblem::from_channels(ch, cfg, 1.0);
    const int L = static_cast<int>(ch.G_b.rows());
    ManifoldPoint x{random_unit_phases(cfg.seed, "psi_r_init", L)};

    CgOptions inner = opts;
    if (inner.seed == CgOptions{}.seed) inner.seed = cfg.seed;
    SolveReport rep;
    rep.solver = "solve_p2";
    double violation = 0.0;
    constexpr int kMaxRounds = 8;
    for (int round = 0; round < kMaxRounds; ++round) {
        auto [xr, inner_rep] = pr_cg_solve(p, x, inner);
        x = std::move(xr);
        rep.iterations += inner_rep.iterations;
        for (auto row : inner_rep.trace) {
            row.aux = p.lambda_r;
            rep.trace.push_back(row);
        }
        MatC H_eff = p.H + p.F_c * (p.amp_r * x.psi_r).asDiagonal() * p.G_b;
        violation = p.g_th - H_eff.squaredNorm();
        if (violation <= 1e-6 * p.g_th) {
            rep.termination = "converged";
            rep.feasible = true;
            break;
        }
        if (round + 1 == kMaxRounds) {
            rep.termination = "infeasible_after_penalty_cap";
            rep.feasible = false;
        } else {
            p.lambda_r *= 10.0;
            inner.restarts = 1;  // warm-started rounds
        }
    }
    MatC fc_psi = p.F_c * (p.amp_r * x.psi_r).asDiagonal();
    rep.final_objective = (p.J + fc_psi * p.G_j).squaredNorm();
    rep.constraint_residual = std::max(0.0, violation);
    return {std::move(x), std::move(rep)};
}

}  // namespace starsim
