#include "starsim/sdp.hpp"

#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace starsim {

namespace {

struct ConstraintKind {
    bool diag = false;  // A = coeff * e_k e_k^H
    int k = -1;
    double coeff = 0.0;
};

ConstraintKind classify(const MatC& a) {
    ConstraintKind ck;
    int nz_row = -1, nz_col = -1, count = 0;
    for (int i = 0; i < a.rows() && count <= 1; ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (std::abs(a(i, j)) > 0.0) {
                ++count;
                nz_row = i;
                nz_col = j;
                if (count > 1) break;
            }
    if (count == 1 && nz_row == nz_col && std::abs(a(nz_row, nz_row).imag()) == 0.0) {
        ck.diag = true;
        ck.k = nz_row;
        ck.coeff = a(nz_row, nz_row).real();
    }
    return ck;
}

MatC symmetrize(const MatC& m) { return 0.5 * (m + m.adjoint()); }

// Largest alpha with X + alpha*D still PSD, via lambda_min of Lx^-1 D Lx^-H.
double max_psd_step(const Eigen::LLT<MatC>& lltX, const MatC& d) {
    MatC t = lltX.matrixL().solve(d);
    t = lltX.matrixL().solve(t.adjoint()).adjoint();
    Eigen::SelfAdjointEigenSolver<MatC> es(symmetrize(t),
                                           Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& p, double tol, int max_iter) {
    const int L = p.dim;
    if (L < 1) throw std::invalid_argument("solve_sdp: dim must be >= 1");
    if (p.objective.rows() != L || p.objective.cols() != L)
        throw std::invalid_argument("solve_sdp: objective dimension mismatch");

    // Ingest: symmetrize, normalize senses to <= / ==, scale rows and objective.
    double c_scale = p.objective.norm();
    if (c_scale <= 0.0) c_scale = 1.0;
    MatC C = symmetrize(p.objective) / c_scale;
    if ((p.objective - p.objective.adjoint()).norm() > 1e-8 * (1.0 + p.objective.norm()))
        std::cerr << "solve_sdp: warning, objective symmetrized beyond tolerance\n";

    const int m = static_cast<int>(p.constraints.size());
    std::vector<MatC> A(m);
    std::vector<ConstraintKind> kind(m);
    Vec b(m);
    std::vector<int> slack_of(m, -1);
    int n_slack = 0;
    for (int i = 0; i < m; ++i) {
        const auto& c = p.constraints[i];
        if (c.a.rows() != L || c.a.cols() != L)
            throw std::invalid_argument("solve_sdp: constraint dimension mismatch");
        if ((c.a - c.a.adjoint()).norm() > 1e-8 * (1.0 + c.a.norm()))
            std::cerr << "solve_sdp: warning, constraint " << i
                      << " symmetrized beyond tolerance\n";
        MatC a = symmetrize(c.a);
        double bi = c.b;
        if (c.sense == Sense::GreaterEq) {
            a = -a;
            bi = -bi;
        }
        double d = a.norm();
        if (d <= 0.0) d = 1.0;
        A[i] = a / d;
        b(i) = bi / d;
        kind[i] = classify(A[i]);
        if (c.sense != Sense::Eq) slack_of[i] = n_slack++;
    }

    const int n_cone = L + n_slack;
    double init = std::max({10.0, std::sqrt(double(L)),
                            m ? b.cwiseAbs().maxCoeff() * std::sqrt(double(L)) : 0.0});
    MatC X = init * MatC::Identity(L, L);
    MatC S = init * MatC::Identity(L, L);
    Vec xs = Vec::Constant(n_slack, init), ss = Vec::Constant(n_slack, init);
    Vec y = Vec::Zero(m);

    SdpSolution sol;
    const double b_norm = 1.0 + (m ? b.cwiseAbs().maxCoeff() : 0.0);
    const double c_norm = 1.0 + C.norm();

    auto trace_apply_x = [&](const MatC& W, int i) {
        // Re Tr(A_i W)
        if (kind[i].diag) return kind[i].coeff * W(kind[i].k, kind[i].k).real();
        return (A[i].transpose().cwiseProduct(W)).sum().real();
    };

    int it = 0;
    for (; it < max_iter; ++it) {
        // Residuals.
        Vec Rp(m);
        for (int i = 0; i < m; ++i) {
            Rp(i) = b(i) - trace_apply_x(X, i);
            if (slack_of[i] >= 0) Rp(i) -= xs(slack_of[i]);
        }
        MatC Rd = C - S;
        for (int i = 0; i < m; ++i) Rd -= y(i) * A[i];
        Vec rds(n_slack);
        for (int i = 0; i < m; ++i)
            if (slack_of[i] >= 0) rds(slack_of[i]) = -y(i) - ss(slack_of[i]);

        double gap = (X.cwiseProduct(S.conjugate())).sum().real() + xs.dot(ss);
        double mu = gap / n_cone;
        double pobj = (C.transpose().cwiseProduct(X)).sum().real();
        double dobj = b.dot(y);
        double rel_p = (m ? Rp.cwiseAbs().maxCoeff() : 0.0) / b_norm;
        double rel_d = std::sqrt(Rd.squaredNorm() + rds.squaredNorm()) / c_norm;
        double rel_g = std::abs(gap) / (1.0 + std::abs(pobj) + std::abs(dobj));

        sol.trace.push_back({it, pobj * c_scale, std::max(rel_p, rel_d), rel_g});
        if (rel_p <= tol && rel_d <= tol && rel_g <= tol) {
            sol.status = SdpStatus::optimal;
            break;
        }
        // Divergence heuristics -> infeasible.
        if ((y.size() && y.cwiseAbs().maxCoeff() > 1e9) ||
            std::abs(dobj) > 1e10) {
            if (rel_p > std::sqrt(tol) || std::abs(dobj) > 1e10) {
                sol.status = SdpStatus::infeasible;
                break;
            }
        }

        Eigen::LLT<MatC> lltS(S);
        Eigen::LLT<MatC> lltX(X);
        if (lltS.info() != Eigen::Success || lltX.info() != Eigen::Success) break;
        MatC Sinv = lltS.solve(MatC::Identity(L, L));

        // Schur complement M_ij = Re Tr(A_i X A_j S^-1) (+ slack diagonal).
        Mat M(m, m);
        std::vector<MatC> P(m);  // X A_j Sinv for dense A_j only
        for (int j = 0; j < m; ++j)
            if (!kind[j].diag) P[j] = X * A[j] * Sinv;
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < m; ++i) {
                double v;
                if (kind[i].diag && kind[j].diag)
                    v = kind[i].coeff * kind[j].coeff *
                        (X(kind[i].k, kind[j].k) * Sinv(kind[j].k, kind[i].k)).real();
                else if (kind[i].diag)
                    v = kind[i].coeff * P[j](kind[i].k, kind[i].k).real();
                else if (kind[j].diag) {
                    // Tr(A_i x_k s~_k) with A_j = c e_k e_k^H
                    int k = kind[j].k;
                    v = kind[j].coeff *
                        (Sinv.row(k) * A[i] * X.col(k))(0, 0).real();
                } else
                    v = (A[i].transpose().cwiseProduct(P[j])).sum().real();
                M(i, j) = v;
            }
        }
        for (int i = 0; i < m; ++i)
            if (slack_of[i] >= 0)
                M(i, i) += xs(slack_of[i]) / ss(slack_of[i]);
        M = 0.5 * (M + M.transpose());
        Eigen::LDLT<Mat> ldlt(M);
        if (ldlt.info() != Eigen::Success) {
            Mat Mr = M + 1e-12 * M.trace() / std::max(1, m) * Mat::Identity(m, m);
            ldlt.compute(Mr);
        }

        MatC XRdSinv = X * Rd * Sinv;

        auto solve_direction = [&](double sigma_mu, const MatC& corr,
                                   const Vec& corr_s, MatC& dX, Vec& dy, MatC& dS,
                                   Vec& dxs, Vec& dss) {
            MatC W = sigma_mu * Sinv - X - XRdSinv;
            if (corr.size()) W -= corr * Sinv;
            Vec g(m);
            for (int i = 0; i < m; ++i) {
                g(i) = trace_apply_x(W, i);
                if (slack_of[i] >= 0) {
                    int si = slack_of[i];
                    double cs_i = corr_s.size() ? corr_s(si) : 0.0;
                    g(i) += (sigma_mu - xs(si) * ss(si) - cs_i) / ss(si) -
                            xs(si) * rds(si) / ss(si);
                }
            }
            dy = ldlt.solve(Rp - g);
            dS = Rd;
            for (int i = 0; i < m; ++i) dS -= dy(i) * A[i];
            dX = W;
            for (int i = 0; i < m; ++i) {
                if (kind[i].diag)
                    dX += dy(i) * kind[i].coeff * (X.col(kind[i].k) * Sinv.row(kind[i].k));
                else
                    dX += dy(i) * (X * A[i] * Sinv);
            }
            dX = symmetrize(dX);
            dxs.resize(n_slack);
            dss.resize(n_slack);
            for (int i = 0; i < m; ++i)
                if (slack_of[i] >= 0) {
                    int si = slack_of[i];
                    double cs_i = corr_s.size() ? corr_s(si) : 0.0;
                    dss(si) = rds(si) - dy(i);
                    dxs(si) = (sigma_mu - xs(si) * ss(si) - cs_i -
                               xs(si) * dss(si)) / ss(si);
                }
        };

        auto cone_steps = [&](const MatC& dX, const Vec& dxs, const MatC& dS,
                              const Vec& dss, double& ap, double& ad) {
            ap = max_psd_step(lltX, dX);
            ad = max_psd_step(lltS, dS);
            for (int si = 0; si < n_slack; ++si) {
                if (dxs(si) < 0.0) ap = std::min(ap, -xs(si) / dxs(si));
                if (dss(si) < 0.0) ad = std::min(ad, -ss(si) / dss(si));
            }
        };

        // Predictor (affine scaling).
        MatC dXa, dSa;
        Vec dya, dxsa, dssa;
        solve_direction(0.0, MatC(), Vec(), dXa, dya, dSa, dxsa, dssa);
        double apa, ada;
        cone_steps(dXa, dxsa, dSa, dssa, apa, ada);
        apa = std::min(1.0, 0.98 * apa);
        ada = std::min(1.0, 0.98 * ada);
        double gap_aff =
            ((X + apa * dXa).cwiseProduct((S + ada * dSa).conjugate())).sum().real() +
            (xs + apa * dxsa).dot(ss + ada * dssa);
        double sigma = std::pow(std::max(gap_aff, 0.0) / gap, 3.0);
        sigma = std::min(0.99, std::max(1e-6, sigma));

        // Corrector.
        MatC corr = dXa * dSa;
        Vec corr_s = dxsa.cwiseProduct(dssa);
        MatC dX, dS;
        Vec dy, dxs, dss;
        solve_direction(sigma * mu, corr, corr_s, dX, dy, dS, dxs, dss);
        double ap, ad;
        cone_steps(dX, dxs, dS, dss, ap, ad);
        ap = std::min(1.0, 0.98 * ap);
        ad = std::min(1.0, 0.98 * ad);

        X = symmetrize(X + ap * dX);
        xs += ap * dxs;
        y += ad * dy;
        S = symmetrize(S + ad * dS);
        ss += ad * dss;
    }

    sol.iterations = it;
    if (sol.status == SdpStatus::max_iter && it >= max_iter)
        sol.status = SdpStatus::max_iter;
    sol.Y = symmetrize(X);
    // Report in the original scale.
    sol.objective_value = (p.objective.transpose().cwiseProduct(sol.Y)).sum().real();
    sol.dual_objective = c_scale * b.dot(y);
    if (!sol.trace.empty()) {
        sol.primal_residual = sol.trace.back().residual;
        sol.dual_residual = sol.trace.back().residual;
        sol.duality_gap = sol.trace.back().aux;
    }
    return sol;
}

void dump_sdp(const SdpProblem& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_sdp: cannot open " + path);
    out.precision(17);
    out << "dim " << p.dim << " constraints " << p.constraints.size() << "\n";
    auto dump_mat = [&out](const MatC& m) {
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = 0; j < m.cols(); ++j)
                out << m(i, j).real() << " " << m(i, j).imag() << " ";
            out << "\n";
        }
    };
    out << "objective\n";
    dump_mat(p.objective);
    for (const auto& c : p.constraints) {
        out << "constraint "
            << (c.sense == Sense::Eq ? "=" : (c.sense == Sense::LessEq ? "<=" : ">="))
            << " " << c.b << "\n";
        dump_mat(c.a);
    }
}

}  // namespace starsim
