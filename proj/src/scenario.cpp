#include "starsim/scenario.hpp"

#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace starsim {

namespace {

constexpr double kPl0 = 1e-3;  // -30 dB reference path loss at 1 m

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::mt19937_64 link_rng(std::uint64_t seed, const std::string& link) {
    return std::mt19937_64(splitmix64(seed ^ fnv1a(link)));
}

Complex cnormal(std::mt19937_64& rng) {
    static constexpr double inv_sqrt2 = 0.70710678118654752440;
    std::normal_distribution<double> n(0.0, 1.0);
    double re = n(rng);
    double im = n(rng);
    return Complex(re * inv_sqrt2, im * inv_sqrt2);
}

double path_loss(double dist, double kappa) { return kPl0 * std::pow(dist, -kappa); }

double link_distance(const Vec2& a, const Vec2& b, const std::string& what) {
    double d = (a - b).norm();
    if (d <= 0.0)
        throw std::invalid_argument("degenerate geometry: zero distance on link " + what);
    return d;
}

double azimuth(const Vec2& from, const Vec2& to) {
    return std::atan2(to.y() - from.y(), to.x() - from.x());
}

// Unit-modulus ULA steering entry, half-wavelength spacing.
Complex steer(int m, double theta) {
    return std::exp(Complex(0.0, M_PI * m * std::sin(theta)));
}

// Rayleigh matrix: entries sqrt(PL) * CN(0,1).
MatC rayleigh(std::mt19937_64& rng, int rows, int cols, double pl) {
    MatC m(rows, cols);
    double a = std::sqrt(pl);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = a * cnormal(rng);
    return m;
}

// Rician matrix between an array of `rows` elements and one of `cols`
// elements: sqrt(PL) * (sqrt(k/(1+k)) * LoS + sqrt(1/(1+k)) * CN(0,1)),
// LoS = a_rows(theta_rt) * a_cols(theta_tr)^H (rank one, unit modulus).
MatC rician(std::mt19937_64& rng, int rows, int cols, double pl, double k,
            double theta_rows, double theta_cols) {
    MatC m(rows, cols);
    double a = std::sqrt(pl);
    double c_los = std::sqrt(k / (1.0 + k));
    double c_nlos = std::sqrt(1.0 / (1.0 + k));
    for (int i = 0; i < rows; ++i) {
        Complex ai = steer(i, theta_rows);
        for (int j = 0; j < cols; ++j) {
            Complex los = ai * std::conj(steer(j, theta_cols));
            m(i, j) = a * (c_los * los + c_nlos * cnormal(rng));
        }
    }
    return m;
}

}  // namespace

Complex los_channel(const LosGeometry& g) {
    double phase = M_PI * (std::cos(g.beta) * std::sin(g.phi) +
                           std::sin(g.beta) * std::sin(g.phi));
    return g.alpha * std::exp(Complex(0.0, phase));
}

void ScenarioConfig::validate() const {
    auto req = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    req(n_tx >= 1 && n_jam >= 1 && n_users >= 1 && n_ris >= 1, "counts must be >= 1");
    req(p_c > 0 && p_s > 0 && p_j > 0 && p_d > 0, "powers must be > 0");
    req(sigma_n_sq > 0 && sigma_d_sq > 0, "noise variances must be > 0");
    req(zeta_sq >= 0, "zeta_sq must be >= 0");
    req(g_th > 0 && gamma_min > 0, "thresholds must be > 0");
    req(beta_t > 0 && beta_t <= 1 && beta_r > 0 && beta_r <= 1, "beta in (0,1]");
    req(beta_t + beta_r <= 1.0 + 1e-12, "beta_t + beta_r must be <= 1");
    req(rician_k >= 0, "rician_k must be >= 0");
    for (const auto& [name, p] : geometry)
        req(p.allFinite(), "geometry coordinates must be finite");
    for (const auto& key : {"direct", "ris", "los"})
        req(path_loss_exponents.count(key) > 0, "missing path loss exponent class");
}

std::map<std::string, Vec2> ScenarioConfig::resolved_geometry() const {
    std::map<std::string, Vec2> g = geometry;
    auto put = [&g](const std::string& k, double x, double y) {
        if (!g.count(k)) g[k] = Vec2(x, y);
    };
    put("tx", 0.0, 0.0);
    put("ris", 50.0, 10.0);
    put("jammer", 40.0, -20.0);
    put("target", 70.0, 20.0);
    put("receiver", 75.0, 15.0);
    if (!g.count("detector"))
        g["detector"] = g.at("target") + Vec2(detector_distance, 0.0);
    // Users: uniform in a 10 m disc around (60, 0), drawn from the seed.
    std::mt19937_64 rng = link_rng(seed, "geometry.users");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < n_users; ++k) {
        std::string name = "user_" + std::to_string(k);
        double r = 10.0 * std::sqrt(u(rng));
        double ang = 2.0 * M_PI * u(rng);
        if (!g.count(name)) g[name] = Vec2(60.0 + r * std::cos(ang), r * std::sin(ang));
    }
    return g;
}

ChannelSet generate_channels(const ScenarioConfig& cfg) {
    cfg.validate();
    auto geo = cfg.resolved_geometry();
    const Vec2 tx = geo.at("tx"), ris = geo.at("ris"), jam = geo.at("jammer");
    const Vec2 tgt = geo.at("target"), rx = geo.at("receiver"), det = geo.at("detector");
    const double k_dir = cfg.path_loss_exponents.at("direct");
    const double k_ris = cfg.path_loss_exponents.at("ris");
    const double k_los = cfg.path_loss_exponents.at("los");
    const double kr = cfg.rician_k;

    ChannelSet ch;
    const int K = cfg.n_users, N = cfg.n_tx, Nj = cfg.n_jam, L = cfg.n_ris;

    ch.H.resize(K, N);
    ch.J.resize(K, Nj);
    ch.F_c.resize(K, L);
    {
        auto rng_h = link_rng(cfg.seed, "H");
        auto rng_j = link_rng(cfg.seed, "J");
        auto rng_f = link_rng(cfg.seed, "F_c");
        for (int k = 0; k < K; ++k) {
            const Vec2 uk = geo.at("user_" + std::to_string(k));
            double pl_h = path_loss(link_distance(tx, uk, "tx-user"), k_dir);
            double pl_j = path_loss(link_distance(jam, uk, "jammer-user"), k_dir);
            double pl_f = path_loss(link_distance(ris, uk, "ris-user"), k_ris);
            ch.H.row(k) = rayleigh(rng_h, 1, N, pl_h);
            ch.J.row(k) = rayleigh(rng_j, 1, Nj, pl_j);
            ch.F_c.row(k) = rician(rng_f, 1, L, pl_f, kr, 0.0, azimuth(ris, uk));
        }
    }
    {
        auto rng = link_rng(cfg.seed, "G_b");
        double pl = path_loss(link_distance(tx, ris, "tx-ris"), k_ris);
        ch.G_b = rician(rng, L, N, pl, kr, azimuth(ris, tx), azimuth(tx, ris));
    }
    {
        auto rng = link_rng(cfg.seed, "G_j");
        double pl = path_loss(link_distance(jam, ris, "jammer-ris"), k_ris);
        ch.G_j = rician(rng, L, Nj, pl, kr, azimuth(ris, jam), azimuth(jam, ris));
    }
    auto ris_vec = [&](const char* tag, const Vec2& node) {
        auto rng = link_rng(cfg.seed, tag);
        double pl = path_loss(link_distance(ris, node, tag), k_ris);
        return RowVecC(rician(rng, 1, L, pl, kr, 0.0, azimuth(ris, node)).row(0));
    };
    ch.f_r = ris_vec("f_r", rx);
    ch.f_t = ris_vec("f_t", tgt);
    ch.f_m = ris_vec("f_m", det);
    {
        auto rng = link_rng(cfg.seed, "h_rd");
        double pl = path_loss(link_distance(rx, det, "receiver-detector"), k_dir);
        ch.h_rd = std::sqrt(pl) * cnormal(rng);
    }
    ch.los_d.alpha = std::sqrt(path_loss(link_distance(det, tgt, "detector-target"), k_los));
    ch.los_d.beta = 0.0;
    ch.los_d.phi = azimuth(det, tgt);
    ch.los_r.alpha = std::sqrt(path_loss(link_distance(rx, tgt, "receiver-target"), k_los));
    ch.los_r.beta = 0.0;
    ch.los_r.phi = azimuth(rx, tgt);
    return ch;
}

std::uint64_t substream_seed(std::uint64_t seed, const std::string& tag) {
    return splitmix64(seed ^ fnv1a(tag));
}

VecC random_unit_phases(std::uint64_t seed, const std::string& tag, int n) {
    std::mt19937_64 rng(substream_seed(seed, tag));
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    VecC v(n);
    for (int i = 0; i < n; ++i) v(i) = std::exp(Complex(0.0, u(rng)));
    return v;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Power value with optional unit suffix; stored internally in watts.
double parse_power(const std::string& raw) {
    std::string v = trim(raw);
    auto ends_with = [&v](const char* suf) {
        std::string s(suf);
        return v.size() > s.size() &&
               v.compare(v.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with("dBW")) return db_to_linear(std::stod(v.substr(0, v.size() - 3)));
    if (ends_with("dBm")) return dbm_to_watts(std::stod(v.substr(0, v.size() - 3)));
    if (ends_with("W")) return std::stod(v.substr(0, v.size() - 1));
    return std::stod(v);
}

Vec2 parse_point(const std::string& raw) {
    std::string v = raw;
    for (auto& c : v)
        if (c == ',') c = ' ';
    std::istringstream is(v);
    double x, y;
    if (!(is >> x >> y)) throw std::invalid_argument("bad coordinate pair: " + raw);
    return Vec2(x, y);
}

}  // namespace

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "n_tx") cfg.n_tx = std::stoi(val);
            else if (key == "n_jam") cfg.n_jam = std::stoi(val);
            else if (key == "n_users") cfg.n_users = std::stoi(val);
            else if (key == "n_ris") cfg.n_ris = std::stoi(val);
            else if (key == "p_c") cfg.p_c = parse_power(val);
            else if (key == "p_s") cfg.p_s = parse_power(val);
            else if (key == "p_j") cfg.p_j = parse_power(val);
            else if (key == "p_d") cfg.p_d = parse_power(val);
            else if (key == "sigma_n_sq") cfg.sigma_n_sq = parse_power(val);
            else if (key == "sigma_d_sq") cfg.sigma_d_sq = parse_power(val);
            else if (key == "zeta_sq") cfg.zeta_sq = std::stod(val);
            else if (key == "g_th") cfg.g_th = std::stod(val);
            else if (key == "gamma_min") cfg.gamma_min = std::stod(val);
            else if (key == "w1") cfg.w1 = std::stod(val);
            else if (key == "w2") cfg.w2 = std::stod(val);
            else if (key == "beta_t") cfg.beta_t = std::stod(val);
            else if (key == "beta_r") cfg.beta_r = std::stod(val);
            else if (key == "rician_k") cfg.rician_k = std::stod(val);
            else if (key == "detector_distance") cfg.detector_distance = std::stod(val);
            else if (key == "p12_uses_pc") cfg.p12_uses_pc = (val == "true" || val == "1");
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key.rfind("geometry.", 0) == 0)
                cfg.geometry[key.substr(9)] = parse_point(val);
            else if (key.rfind("path_loss_exponents.", 0) == 0)
                cfg.path_loss_exponents[key.substr(20)] = std::stod(val);
            else
                throw std::invalid_argument("unknown key: " + key);
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception& e) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " +
                                        e.what());
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace starsim
