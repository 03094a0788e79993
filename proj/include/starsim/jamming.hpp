#pragma once

#include <cstdint>
#include <functional>

#include "starsim/scenario.hpp"
#include "starsim/types.hpp"

namespace starsim {

/// Reflection-subspace penalty problem:
/// f2(psi_r) = ||J_eff||^2 + lambda_r * (g_th - ||H_eff||^2).
struct PenaltyProblem {
    MatC J, H, F_c, G_j, G_b;
    double g_th = 0.0;
    double lambda_r = 1.0;
    double amp_r = 1.0;
    bool clip_penalty = false;  // exact-penalty variant max(0, g_th - ||H_eff||^2)

    static PenaltyProblem from_channels(const ChannelSet& ch,
                                        const ScenarioConfig& cfg,
                                        double lambda_r = 1.0);
};

/// Point on the product-of-circles manifold (entrywise unit modulus).
struct ManifoldPoint {
    VecC psi_r;
};

struct CgState {
    ManifoldPoint point;
    VecC riem_grad;
    VecC direction;
    double beta_pr = 0.0;
    double step = 0.0;
    double objective = 0.0;  // original (unnormalized) units
    int iteration = 0;
};

double penalty_objective(const PenaltyProblem& p, const ManifoldPoint& x);

/// Wirtinger gradient wrt conj(psi_r); directional derivative along a tangent
/// v equals 2*Re(g^H v).
VecC euclidean_gradient(const PenaltyProblem& p, const ManifoldPoint& x);

/// Componentwise projection onto the circle tangent space:
/// out_l = e_l - Re(conj(e_l) psi_l) psi_l.
VecC riemannian_gradient(const ManifoldPoint& x, const VecC& egrad);

/// Entrywise renormalized step; a zero denominator keeps the old entry.
ManifoldPoint retract(const ManifoldPoint& x, const VecC& v, double t);

struct CgOptions {
    int max_iter = 1000;
    double grad_tol = 1e-6;      // on the normalized objective's gradient norm
    double f_tol = 1e-10;        // normalized objective change
    double armijo_c1 = 1e-4;
    double shrink = 0.5;
    double step0 = 1.0;
    int max_backtracks = 50;
    int restarts = 1;            // extra seeded random starts beyond x0
    std::uint64_t seed = 1;
    std::function<void(const CgState&)> observer;  // after each accepted step
};

std::pair<ManifoldPoint, SolveReport> pr_cg_solve(const PenaltyProblem& p,
                                                  const ManifoldPoint& x0,
                                                  const CgOptions& opts = {});

/// P2 chain: outer penalty loop (lambda_r x10 when the gain floor is still
/// violated, up to 8 rounds), warm-started inner CG solves.
std::pair<ManifoldPoint, SolveReport> solve_p2(const ChannelSet& ch,
                                               const ScenarioConfig& cfg,
                                               const CgOptions& opts = {});

}  // namespace starsim
