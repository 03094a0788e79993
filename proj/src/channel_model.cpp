#include "starsim/channel_model.hpp"

#include <stdexcept>

namespace starsim {

StarRisState StarRisState::from_phases(VecC psi_t, VecC psi_r, double beta_t,
                                       double beta_r) {
    StarRisState s;
    s.psi_t = std::move(psi_t);
    s.psi_r = std::move(psi_r);
    s.amp_t = std::sqrt(beta_t);
    s.amp_r = std::sqrt(beta_r);
    return s;
}

namespace {

void check_dims(const ChannelSet& ch, const StarRisState& ris) {
    const auto L = ch.G_b.rows();
    if (ris.psi_r.size() != L || ris.psi_t.size() != L ||
        ch.F_c.cols() != L || ch.G_j.rows() != L || ch.f_r.cols() != L ||
        ch.f_t.cols() != L || ch.f_m.cols() != L ||
        ch.H.rows() != ch.F_c.rows() || ch.H.cols() != ch.G_b.cols() ||
        ch.J.rows() != ch.F_c.rows() || ch.J.cols() != ch.G_j.cols())
        throw std::invalid_argument("channel/RIS dimension mismatch");
}

// 2 * sum(log |diag(L)|) for the Cholesky factor of a Hermitian PD matrix.
double logdet_hermitian(const MatC& m) {
    Eigen::LLT<MatC> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("sum_rate: interference covariance not positive definite");
    double ld = 0.0;
    auto d = llt.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i) ld += std::log(std::abs(d(i).real()));
    return 2.0 * ld;
}

}  // namespace

void effective_comm_channels(const ChannelSet& ch, const StarRisState& ris,
                             MatC& H_eff, MatC& J_eff) {
    check_dims(ch, ris);
    MatC fc_psi = ch.F_c * (ris.amp_r * ris.psi_r).asDiagonal();
    H_eff = ch.H + fc_psi * ch.G_b;
    J_eff = ch.J + fc_psi * ch.G_j;
}

void effective_sense_channels(const ChannelSet& ch, const StarRisState& ris,
                              EffectiveChannels& eff) {
    check_dims(ch, ris);
    VecC a = ris.amp_t * ris.psi_t;
    RowVecC fr = ch.f_r.cwiseProduct(a.transpose());
    RowVecC ft = ch.f_t.cwiseProduct(a.transpose());
    RowVecC fm = ch.f_m.cwiseProduct(a.transpose());
    eff.h_rt = fr * ch.G_b;
    eff.h_rj = fr * ch.G_j;
    eff.h_s = ft * ch.G_b;
    eff.i_eff = fm * ch.G_b;
}

EffectiveChannels compose_effective(const ChannelSet& ch, const StarRisState& ris) {
    EffectiveChannels eff;
    effective_comm_channels(ch, ris, eff.H_eff, eff.J_eff);
    effective_sense_channels(ch, ris, eff);
    return eff;
}

double sum_rate(const MatC& H_eff, const MatC& J_eff, double p_c, double p_j,
                double sigma_n_sq) {
    if (sigma_n_sq <= 0.0)
        throw std::invalid_argument("sum_rate: sigma_n_sq must be > 0");
    const auto K = H_eff.rows();
    MatC S = sigma_n_sq * MatC::Identity(K, K);
    if (p_j > 0.0 && J_eff.size() > 0) S += p_j * (J_eff * J_eff.adjoint());
    MatC T = S + p_c * (H_eff * H_eff.adjoint());
    return (logdet_hermitian(T) - logdet_hermitian(S)) / std::log(2.0);
}

double sinr_malicious(const ChannelSet& ch, const EffectiveChannels& eff,
                      const ScenarioConfig& cfg) {
    double d2 = std::norm(los_channel(ch.los_d));
    double hs2 = eff.h_s.squaredNorm();
    double im2 = eff.i_eff.squaredNorm();
    double num = cfg.zeta_sq * cfg.p_d * d2 * d2 + cfg.zeta_sq * cfg.p_s * d2 * hs2;
    double den = cfg.sigma_d_sq + cfg.p_c * im2;
    return num / den;
}

double sinr_isac(const ChannelSet& ch, const EffectiveChannels& eff,
                 const ScenarioConfig& cfg) {
    double d2 = std::norm(los_channel(ch.los_d));
    double r2 = std::norm(los_channel(ch.los_r));
    double hs2 = eff.h_s.squaredNorm();
    double num = cfg.p_s * cfg.zeta_sq * r2 * hs2 + cfg.zeta_sq * cfg.p_d * d2 * r2;
    double den = cfg.sigma_d_sq + cfg.p_d * std::norm(ch.h_rd) +
                 cfg.p_j * eff.h_rj.squaredNorm();
    return num / den;
}

double detection_probability(double gamma) {
    if (gamma < 0.0)
        throw std::invalid_argument("detection_probability: gamma must be >= 0");
    if (gamma < 1e-300) return std::exp(-1.0);
    return std::exp(-std::log1p(gamma) / gamma);
}

MetricReport evaluate_metrics(const ChannelSet& ch, const StarRisState& ris,
                              const ScenarioConfig& cfg) {
    EffectiveChannels eff = compose_effective(ch, ris);
    MetricReport m;
    m.sum_rate = sum_rate(eff.H_eff, eff.J_eff, cfg.p_c, cfg.p_j, cfg.sigma_n_sq);
    m.gamma_sd = sinr_malicious(ch, eff, cfg);
    m.gamma_sr = sinr_isac(ch, eff, cfg);
    m.p_det_malicious = detection_probability(m.gamma_sd);
    m.p_det_isac = detection_probability(m.gamma_sr);
    m.comm_gain = eff.H_eff.squaredNorm();
    m.jam_gain = eff.J_eff.squaredNorm();
    return m;
}

}  // namespace starsim
