#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "starsim/channel_model.hpp"
#include "starsim/sdp.hpp"
#include "starsim/scenario.hpp"

namespace starsim {

/// Quadratic-form data of the transmission-subspace subproblem. The Q
/// matrices satisfy ||h_s||^2 = psi^H Q_s psi (and analogously Q_m, Q_r)
/// for the unit-modulus phase vector psi used by StarRisState, with the
/// transmission amplitude folded in.
struct ConcealmentProblem {
    MatC Q_s, Q_m, Q_r;  // Hermitian PSD, L x L
    double zeta_sq = 1.0;
    double p_d = 1.0;
    double p_probe = 1.0;  // p_s by default, p_c when p12_uses_pc is set
    double p_c = 1.0;
    double p_j = 1.0;
    double sigma_d_sq = 1.0;
    double d_abs_sq = 1.0;    // |d|^2
    double r_abs_sq = 1.0;    // |r|^2
    double h_rd_abs_sq = 0.0; // |h_rd|^2
    double gamma_min = 1e-3;

    int dim() const { return static_cast<int>(Q_s.rows()); }

    /// gamma_{s|d} numerator / denominator at a given phase vector.
    double numerator(const VecC& psi) const;
    double denominator(const VecC& psi) const;
    double gamma_sd(const VecC& psi) const { return numerator(psi) / denominator(psi); }
    double gamma_sr(const VecC& psi) const;

    double numerator_y(const MatC& Y) const;
    double denominator_y(const MatC& Y) const;
};

struct DinkelbachState {
    double lambda_s = 0.0;
    int iteration = 0;
    double f_value = 0.0;  // parametric optimum N(Y) - lambda * D(Y)
    std::vector<TraceRow> trace;  // iter, lambda, F(lambda), sdp residual
    bool feasible = true;
    std::string termination;
};

struct ConcealmentSolution {
    VecC psi_t;
    double gamma_sd = 0.0;
    double gamma_sr = 0.0;
    double relaxed_bound = 0.0;  // final Dinkelbach lambda (SDR lower bound)
    bool feasible = false;       // sensing floor met by the returned candidate
    SolveReport report;
};

ConcealmentProblem build_problem(const ChannelSet& ch, const ScenarioConfig& cfg);

/// Parametric SDP of one Dinkelbach step: objective C = coeff_s*Q_s -
/// lambda*p_c*Q_m (constant terms tracked separately), unit-diagonal lifts of
/// |psi_l| = 1, and the linearized sensing floor as one trace inequality.
SdpProblem parametric_sdp(const ConcealmentProblem& p, double lambda_s);

struct DinkelbachOptions {
    double tol = 1e-8;       // on |lambda_{k+1} - lambda_k| (= |F|/D)
    int max_iter = 50;
    double sdp_tol = 1e-9;
    std::optional<double> lambda0;  // default: ratio at a seeded random psi
    std::uint64_t seed = 1;
};

std::pair<MatC, DinkelbachState> dinkelbach_solve(
    const ConcealmentProblem& p, const DinkelbachOptions& opts = {});

/// Rank-one recovery: candidates z ~ CN(0, Y) projected entrywise to unit
/// modulus, plus the phase-projected leading eigenvector (candidate 0); best
/// feasible gamma_{s|d} wins, ties broken by lowest candidate index.
ConcealmentSolution gaussian_randomization(const MatC& Y,
                                           const ConcealmentProblem& p,
                                           int n_samples = 500,
                                           std::uint64_t seed = 1);

/// Full P1 chain: feasibility pre-solve, Dinkelbach outer loop, randomization.
ConcealmentSolution solve_concealment(const ConcealmentProblem& p,
                                      const DinkelbachOptions& opts = {},
                                      int n_samples = 500);

}  // namespace starsim
