#pragma once

#include "starsim/scenario.hpp"
#include "starsim/types.hpp"

namespace starsim {

/// STAR-RIS configuration: unit-modulus phase vectors plus the
/// energy-splitting amplitudes sqrt(beta_t), sqrt(beta_r).
struct StarRisState {
    VecC psi_t;  // transmission phases, entry l is exp(j*theta_t^l)
    VecC psi_r;  // reflection phases
    double amp_t = 1.0;
    double amp_r = 1.0;

    static StarRisState from_phases(VecC psi_t, VecC psi_r, double beta_t,
                                    double beta_r);
};

struct EffectiveChannels {
    MatC H_eff;     // K x N
    MatC J_eff;     // K x Nj
    RowVecC h_rt;   // 1 x N   tx -> ISAC receiver (via target-side RIS)
    RowVecC h_rj;   // 1 x Nj  jammer -> ISAC receiver
    RowVecC h_s;    // 1 x N   tx -> target
    RowVecC i_eff;  // 1 x N   tx -> malicious detector
};

struct MetricReport {
    double sum_rate = 0.0;        // bits/s/Hz
    double gamma_sd = 0.0;        // malicious detector sensing SINR, linear
    double gamma_sr = 0.0;        // ISAC receiver sensing SINR, linear
    double p_det_malicious = 0.0;
    double p_det_isac = 0.0;
    double comm_gain = 0.0;       // ||H_eff||_F^2
    double jam_gain = 0.0;        // ||J_eff||_F^2
};

/// H_eff = H + amp_r * F_c * diag(psi_r) * G_b, same for J_eff with G_j.
void effective_comm_channels(const ChannelSet& ch, const StarRisState& ris,
                             MatC& H_eff, MatC& J_eff);

/// Sensing-side compositions through the transmission subspace.
void effective_sense_channels(const ChannelSet& ch, const StarRisState& ris,
                              EffectiveChannels& eff);

EffectiveChannels compose_effective(const ChannelSet& ch, const StarRisState& ris);

/// log2 det(I + p_c H H^H (sigma^2 I + p_j J J^H)^-1), evaluated through the
/// determinant identity log2 det(S + p_c H H^H) - log2 det(S) with
/// S = sigma^2 I + p_j J J^H, via Cholesky factorizations.
double sum_rate(const MatC& H_eff, const MatC& J_eff, double p_c, double p_j,
                double sigma_n_sq);

double sinr_malicious(const ChannelSet& ch, const EffectiveChannels& eff,
                      const ScenarioConfig& cfg);

double sinr_isac(const ChannelSet& ch, const EffectiveChannels& eff,
                 const ScenarioConfig& cfg);

/// P(gamma) = (1+gamma)^(-1/gamma); the gamma -> 0 limit is exp(-1).
/// Strictly increasing, range (exp(-1), 1). Rejects negative gamma.
double detection_probability(double gamma);

MetricReport evaluate_metrics(const ChannelSet& ch, const StarRisState& ris,
                              const ScenarioConfig& cfg);

}  // namespace starsim
