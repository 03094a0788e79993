#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "starsim/types.hpp"

namespace starsim {

/// Line-of-sight link parameters (path gain, elevation, azimuth).
struct LosGeometry {
    double alpha = 1.0;  // path gain, linear
    double beta = 0.0;   // elevation angle, radians
    double phi = 0.0;    // azimuth angle, radians
};

/// d = alpha * exp(j*pi*(cos(beta)sin(phi) + sin(beta)sin(phi))).
/// |los_channel(g)| == g.alpha exactly.
Complex los_channel(const LosGeometry& g);

struct ScenarioConfig {
    int n_tx = 16;    // ISAC transmitter antennas
    int n_jam = 4;    // jammer antennas
    int n_users = 4;  // DL users
    int n_ris = 48;   // STAR-RIS elements

    // Powers in linear watts. The config-file front end accepts dBW/dBm.
    double p_c = db_to_linear(6.0);     // communication transmit power, 6 dBW
    double p_s = db_to_linear(8.0);     // probing power, 8 dBW
    double p_j = dbm_to_watts(30.0);    // jamming power
    double p_d = dbm_to_watts(30.0);    // malicious detector probing power
    double sigma_n_sq = dbm_to_watts(-120.0);  // AWGN variance at users
    double sigma_d_sq = dbm_to_watts(-57.0);   // AWGN variance at sensing receivers

    double zeta_sq = 1.0;    // target RCS second moment
    double g_th = 2e-8;      // communication gain threshold (linear)
    double gamma_min = 1e-5; // ISAC sensing SINR floor (linear)
    double w1 = 0.5, w2 = 0.5;  // objective weights of the joint problem
                                // (stored for reporting; the decomposed
                                // solvers do not consume them)

    double beta_t = 0.5, beta_r = 0.5;  // energy-splitting amplitudes squared

    // Node name -> 2-D coordinates in meters. Empty entries fall back to the
    // built-in layout; users are placed from the seed when not given.
    std::map<std::string, Vec2> geometry;
    double detector_distance = 10.0;  // detector offset from target (m),
                                      // used when "detector" is not pinned

    // Link class -> path loss exponent. Classes: direct, ris, los.
    std::map<std::string, double> path_loss_exponents = {
        {"direct", 3.5}, {"ris", 2.2}, {"los", 2.0}};

    double rician_k = 2.0;  // Rician factor for RIS-adjacent links (3 dB)
    bool p12_uses_pc = false;  // probing-path power term: p_s (default) or p_c

    std::uint64_t seed = 1;

    void validate() const;  // throws std::invalid_argument on violation

    /// Full node map with defaults filled in (tx, ris, jammer, target,
    /// receiver, detector, user_0..user_{K-1}).
    std::map<std::string, Vec2> resolved_geometry() const;
};

/// All static channels of one realization.
struct ChannelSet {
    MatC H;    // K x N   transmitter -> users (direct)
    MatC J;    // K x Nj  jammer -> users (direct)
    MatC F_c;  // K x L   STAR-RIS -> users
    MatC G_b;  // L x N   transmitter -> STAR-RIS
    MatC G_j;  // L x Nj  jammer -> STAR-RIS
    RowVecC f_r;  // 1 x L  STAR-RIS -> ISAC receiver
    RowVecC f_t;  // 1 x L  STAR-RIS -> target
    RowVecC f_m;  // 1 x L  STAR-RIS -> malicious detector
    Complex h_rd = 0.0;  // ISAC receiver <-> detector (direct)
    LosGeometry los_d;   // detector <-> target
    LosGeometry los_r;   // ISAC receiver <-> target
};

/// Deterministic in cfg (including seed): same cfg -> bit-identical channels.
/// Rayleigh on direct links, Rician on RIS-adjacent links,
/// PL(dist) = PL0 * dist^-kappa with PL0 = -30 dB at 1 m.
ChannelSet generate_channels(const ScenarioConfig& cfg);

/// Reads a flat `key = value` config file (# comments, UTF-8). Power values
/// accept dBW/dBm/W suffixes; geometry.<node> takes "x,y".
ScenarioConfig load_config(const std::string& path);

/// Uniform phases on the unit circle, seeded substream of `seed` named `tag`.
VecC random_unit_phases(std::uint64_t seed, const std::string& tag, int n);

/// Stable substream seed derivation (FNV-1a over tag, mixed into seed).
std::uint64_t substream_seed(std::uint64_t seed, const std::string& tag);

}  // namespace starsim
