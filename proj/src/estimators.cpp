#include "cvverify/estimators.hpp"

#include "cvverify/constants.hpp"
#include "cvverify/special.hpp"

#include <cmath>
#include <sstream>

namespace cvv {

void EstimatorConfig::validate(int k) const {
    if (static_cast<int>(p.size()) != k) throw ConfigError("estimator config: p must have one entry per mode");
    for (int q : p)
        if (q < 1) throw ConfigError("estimator config: p must be >= 1");
    if (!(eta > 0 && eta <= 1)) throw ConfigError("estimator config: eta must lie in (0,1]");
    if (eta == 1.0) {
        if (!(tau > 0 && tau <= 1)) throw ConfigError("estimator config: tau must lie in (0,1]");
    } else {
        if (!(tau > 0 && tau < 1 / eta)) throw ConfigError("estimator config: tau must lie in (0,1/eta)");
        double tt = t();
        if (!(tt > 0 && tt < 1)) throw ConfigError("estimator config: t = 1-eta+tau eta^2 must lie in (0,1)");
    }
}

// ---------------- homodyne ----------------

namespace {

const double kSqrt2 = std::sqrt(2.0);

double pattern_from(const std::vector<double>& u, const std::vector<double>& v, int a, int b, double x) {
    // a = index carried by u, b = index carried by v
    return 4 * x * u[a] * v[b] - 2 * kSqrt2 * std::sqrt(a + 1.0) * u[a + 1] * v[b] -
           2 * kSqrt2 * std::sqrt(b + 1.0) * u[a] * v[b + 1];
}

std::vector<double> u_values(int nmax, double x) {
    if (!(std::abs(x) <= kSeriesWindow))
        throw NumericalError("oscillator series evaluated outside |x| <= 20; use the asymptotic branch");
    return hermite_functions(nmax, x);
}

}  // namespace

double hom_f(int l, int k, double x) {
    if (k < 0 || l < 0) throw ConfigError("hom_f: indices must be >= 0");
    auto u = u_values(k + 1, x);
    auto v = ho_v_all(l + 1, x);
    return pattern_from(u, v, k, l, x);
}

double hom_pattern(int k, int l, double x) { return hom_f(std::max(k, l), std::min(k, l), x); }

RMat hom_pattern_table(int C, double x) {
    if (C < 1) throw ConfigError("hom_pattern_table: C must be >= 1");
    auto u = u_values(C, x);
    auto v = ho_v_all(C, x);
    RMat T(C, C);
    for (int k = 0; k < C; ++k)
        for (int l = k; l < C; ++l) {
            T(k, l) = pattern_from(u, v, k, l, x);
            T(l, k) = T(k, l);
        }
    return T;
}

cplx hom_element(int k, int l, double x, double theta) {
    return hom_pattern(k, l, x) * std::exp(kI * double(k - l) * theta);
}

namespace {

double g_from_table(const CoreState& core, const RMat& T, double theta) {
    double s = 0;
    for (const auto& [ik, ck] : core.coeffs)
        for (const auto& [il, cl] : core.coeffs) {
            int k = ik[0], l = il[0];
            s += (std::conj(ck) * cl * std::exp(kI * double(k - l) * theta)).real() * T(k, l);
        }
    return s;
}

void require_single_mode(const CoreState& core) {
    if (core.modes != 1) throw ConfigError("homodyne estimator: single-mode core state required");
}

}  // namespace

double hom_g(const CoreState& core, double x, double theta) {
    require_single_mode(core);
    return g_from_table(core, hom_pattern_table(core.cutoffs[0], x), theta);
}

double hom_f_noisy(int k, int l, double x, double eta) {
    if (k < 0 || l < 0) throw ConfigError("hom_f_noisy: indices must be >= 0");
    if (!(eta > 0.5 && eta <= 1)) throw ConfigError("noisy homodyne estimator undefined for eta <= 1/2");
    if (eta == 1.0) return hom_pattern(k, l, x);
    if (k > l) std::swap(k, l);
    int d = l - k;
    double c = (2 * eta - 1) / (2 * eta);
    double y = x / kSqrt2;  // quadrature units of the integral kernel
    // tail: t^{1+d+2k} e^{-c t^2} below 1e-17 of its peak scale
    double T = std::sqrt((40.0 + (1 + d + 2 * k) * std::log(1.0 + (1 + d + 2 * k) / c)) / c);
    double width = std::min(0.25, 1.0 / (2 * std::abs(y) + 1));
    int npan = static_cast<int>(std::ceil(T / width));
    std::vector<double> gx, gw;
    gauss_legendre(12, gx, gw);
    double h = T / npan, s = 0;
    for (int pnl = 0; pnl < npan; ++pnl) {
        double mid = (pnl + 0.5) * h;
        for (std::size_t i = 0; i < gx.size(); ++i) {
            double t = mid + 0.5 * h * gx[i];
            double osc = (d % 2 == 0) ? std::cos(2 * t * y) : std::sin(2 * t * y);
            s += 0.5 * h * gw[i] * t * tpow_genlaguerre(k, d, t) * std::exp(-c * t * t) * osc;
        }
    }
    double pref = std::sqrt(std::exp(log_factorial(k) - log_factorial(l)));
    double sign = (d % 2 == 0) ? ((d / 2) % 2 ? -1.0 : 1.0) : (((d - 1) / 2) % 2 ? -1.0 : 1.0);
    return 2 * sign * pref * s;
}

NoisyHomodyneTable::NoisyHomodyneTable(int C, double eta, double xmax, double h) : C_(C), eta_(eta), xmax_(xmax), h_(h) {
    if (C < 1) throw ConfigError("noisy table: C must be >= 1");
    if (!(eta > 0.5 && eta <= 1)) throw ConfigError("noisy homodyne estimator undefined for eta <= 1/2");
    if (!(xmax > 0 && h > 0)) throw ConfigError("noisy table: bad grid");
    std::size_t n = static_cast<std::size_t>(std::ceil(2 * xmax / h)) + 1;
    tab_.resize(n);
    parallel_blocks(n, [&](std::size_t i) {
        double x = -xmax + i * h;
        RMat T(C, C);
        if (eta == 1.0) {
            T = hom_pattern_table(C, x);
        } else {
            for (int k = 0; k < C; ++k)
                for (int l = k; l < C; ++l) {
                    T(k, l) = hom_f_noisy(k, l, x, eta);
                    T(l, k) = T(k, l);
                }
        }
        tab_[i] = T;
    });
}

double NoisyHomodyneTable::pattern(int k, int l, double x) const {
    if (k < 0 || l < 0 || k >= C_ || l >= C_) throw ConfigError("noisy table: index outside the tabulated core");
    double pos = (x + xmax_) / h_;
    if (!(pos >= 1 && pos + 2 < static_cast<double>(tab_.size()))) return hom_f_noisy(k, l, x, eta_);
    // cubic Lagrange on nodes i-1..i+2
    std::size_t i = static_cast<std::size_t>(pos);
    double w = pos - i;
    double y0 = tab_[i - 1](k, l), y1 = tab_[i](k, l), y2 = tab_[i + 1](k, l), y3 = tab_[i + 2](k, l);
    return y0 * (-w * (w - 1) * (w - 2) / 6) + y1 * ((w + 1) * (w - 1) * (w - 2) / 2) +
           y2 * (-(w + 1) * w * (w - 2) / 2) + y3 * ((w + 1) * w * (w - 1) / 6);
}

double NoisyHomodyneTable::g(const CoreState& core, double x, double theta) const {
    require_single_mode(core);
    if (core.cutoffs[0] > C_) throw ConfigError("noisy table: core larger than the table");
    RMat T(core.cutoffs[0], core.cutoffs[0]);
    for (int k = 0; k < T.rows(); ++k)
        for (int l = 0; l < T.cols(); ++l) T(k, l) = pattern(k, l, x);
    return g_from_table(core, T, theta);
}

double NoisyHomodyneTable::max_abs_sum() const {
    double m = 0;
    for (const auto& T : tab_) m = std::max(m, T.cwiseAbs().sum());
    return m;
}

// ---------------- heterodyne ----------------

namespace {

void check_tau_ideal(double tau) {
    if (!(tau > 0 && tau <= 1)) throw ConfigError("heterodyne estimator: tau must lie in (0,1]");
}

void check_tau_noisy(double tau, double eta) {
    if (!(eta > 0 && eta <= 1)) throw ConfigError("heterodyne estimator: eta must lie in (0,1]");
    if (eta == 1.0) return check_tau_ideal(tau);
    if (!(tau > 0 && tau < 1 / eta)) throw ConfigError("noisy heterodyne estimator: tau must lie in (0,1/eta)");
}

double g_weight(int m, int n, int j) { return std::sqrt(binom(m + j, m) * binom(n + j, n)); }

}  // namespace

cplx het_f(int k, int l, cplx z, double tau) {
    if (k < 0 || l < 0) throw ConfigError("het_f: indices must be >= 0");
    check_tau_ideal(tau);
    double pref = std::pow(tau, -1.0 - 0.5 * (k + l)) * std::exp((1 - 1 / tau) * std::norm(z));
    return pref * laguerre_2d(l, k, z / std::sqrt(tau));
}

cplx het_g(int m, int n, int p, cplx z, double tau) {
    if (p < 1) throw ConfigError("het_g: p must be >= 1");
    cplx s = 0;
    for (int j = 0; j < p; ++j) s += ((j % 2) ? -1.0 : 1.0) * std::pow(tau, j) * g_weight(m, n, j) * het_f(m + j, n + j, z, tau);
    return s;
}

cplx het_f_noisy(int k, int l, cplx z, double tau, double eta) {
    if (k < 0 || l < 0) throw ConfigError("het_f_noisy: indices must be >= 0");
    check_tau_noisy(tau, eta);
    if (eta == 1.0) return het_f(k, l, z, tau);
    // sum_p (-tau)^p ... z^{k-p} zbar^{l-p} = tau^{(k+l)/2} L_{l,k}(z/sqrt(tau))
    double pref = std::pow(tau * eta, -(k + l + 1.0)) * std::pow(tau, 0.5 * (k + l));
    return pref * std::exp((eta - 1 / tau) * std::norm(z)) * laguerre_2d(l, k, z / std::sqrt(tau));
}

cplx het_g_noisy(int k, int l, int p, cplx z, double tau, double eta) {
    if (p < 1) throw ConfigError("het_g_noisy: p must be >= 1");
    check_tau_noisy(tau, eta);
    double t = 1 - eta + tau * eta * eta;
    cplx s = 0;
    for (int j = 0; j < p; ++j)
        s += ((j % 2) ? -1.0 : 1.0) * std::pow(t, j) * g_weight(k, l, j) * het_f_noisy(k + j, l + j, z, tau, eta);
    return s;
}

CMat het_g_table(int c, int p, cplx z, double tau, double eta) {
    if (c < 1 || p < 1) throw ConfigError("het_g_table: bad sizes");
    check_tau_noisy(tau, eta);
    double t = eta == 1.0 ? tau : 1 - eta + tau * eta * eta;
    // f(k,l) = pref(k+l) E L_{l,k}(z/sqrt(tau)); E is shared
    cplx zs = z / std::sqrt(tau);
    double E = eta == 1.0 ? std::exp((1 - 1 / tau) * std::norm(z)) : std::exp((eta - 1 / tau) * std::norm(z));
    auto pref = [&](int kl) {
        return eta == 1.0 ? std::pow(tau, -1.0 - 0.5 * kl) : std::pow(tau * eta, -(kl + 1.0)) * std::pow(tau, 0.5 * kl);
    };
    CMat G = CMat::Zero(c, c);
    for (int m = 0; m < c; ++m)
        for (int n = 0; n < c; ++n) {
            cplx s = 0;
            double tj = 1;
            // only the shifted diagonal of f is needed
            for (int j = 0; j < p; ++j) {
                cplx f = pref(m + n + 2 * j) * E * laguerre_2d(n + j, m + j, zs);
                s += ((j % 2) ? -tj : tj) * g_weight(m, n, j) * f;
                tj *= t;
            }
            G(m, n) = s;
        }
    return G;
}

double het_g_kmode(const CoreState& core, const std::vector<cplx>& alpha, const EstimatorConfig& cfg) {
    if (static_cast<int>(alpha.size()) != core.modes) throw ConfigError("het_g_kmode: one outcome per mode required");
    return HetEstimator(core, cfg)(alpha.data());
}

HetEstimator::HetEstimator(const CoreState& core, const EstimatorConfig& cfg) : modes_(core.modes), tau_(cfg.tau) {
    cfg.validate(core.modes);
    check_tau_noisy(cfg.tau, cfg.eta);
    double tau = cfg.tau, eta = cfg.eta;
    bool ideal = eta == 1.0;
    double t = ideal ? tau : 1 - eta + tau * eta * eta;
    kappa_ = ideal ? 1 - 1 / tau : eta - 1 / tau;
    auto pref = [&](int kl) {
        return ideal ? std::pow(tau, -1.0 - 0.5 * kl) : std::pow(tau * eta, -(kl + 1.0)) * std::pow(tau, 0.5 * kl);
    };
    tabs_.resize(modes_);
    for (int i = 0; i < modes_; ++i) {
        ModeTab& T = tabs_[i];
        T.c = core.cutoffs[i];
        int p = cfg.p[i];
        T.poly.assign(T.c * T.c, {});
        for (int m = 0; m < T.c; ++m)
            for (int n = 0; n < T.c; ++n) {
                // sum_j (-t)^j w_j pref f-polynomial of L_{n+j,m+j}
                auto& P = T.poly[m * T.c + n];
                P.assign(std::min(m, n) + p, 0.0);
                double tj = 1;
                for (int j = 0; j < p; ++j) {
                    int a = n + j, b = m + j, q = std::min(a, b);
                    double s = ((j % 2) ? -tj : tj) * g_weight(m, n, j) * pref(m + n + 2 * j);
                    double c = std::exp(-0.5 * (log_factorial(a) + log_factorial(b)));
                    P[q] += s * c;
                    for (int r = 0; r < q; ++r) {
                        c *= -double(a - r) * double(b - r) / double(r + 1);
                        P[q - r - 1] += s * c;
                    }
                    tj *= t;
                }
            }
    }
    for (const auto& [m, cm] : core.coeffs)
        for (const auto& [n, cn] : core.coeffs) {
            pair_w_.push_back(std::conj(cm) * cn);
            pair_m_.insert(pair_m_.end(), m.begin(), m.end());
            pair_n_.insert(pair_n_.end(), n.begin(), n.end());
        }
}

double HetEstimator::operator()(const cplx* alpha) const {
    thread_local std::vector<cplx> G, pw;
    thread_local std::vector<std::size_t> base;
    std::size_t off = 0;
    base.resize(modes_);
    for (int i = 0; i < modes_; ++i) base[i] = off, off += std::size_t(tabs_[i].c) * tabs_[i].c;
    G.resize(off);
    for (int i = 0; i < modes_; ++i) {
        const ModeTab& T = tabs_[i];
        cplx zs = alpha[i] / std::sqrt(tau_);
        double w = std::norm(zs);
        double E = std::exp(kappa_ * std::norm(alpha[i]));
        // pw[d] = zs^d, pw[c + d] = conj(zs)^d
        pw.resize(2 * T.c);
        pw[0] = pw[T.c] = 1.0;
        for (int d = 1; d < T.c; ++d) pw[d] = pw[d - 1] * zs, pw[T.c + d] = pw[T.c + d - 1] * std::conj(zs);
        for (int m = 0; m < T.c; ++m)
            for (int n = 0; n < T.c; ++n) {
                const auto& P = T.poly[m * T.c + n];
                double acc = 0;
                for (auto it = P.rbegin(); it != P.rend(); ++it) acc = acc * w + *it;
                cplx ph = m > n ? pw[m - n] : pw[T.c + n - m];
                G[base[i] + m * T.c + n] = E * acc * ph;
            }
    }
    cplx s = 0;
    const int *pm = pair_m_.data(), *pn = pair_n_.data();
    for (std::size_t k = 0; k < pair_w_.size(); ++k, pm += modes_, pn += modes_) {
        cplx v = pair_w_[k];
        for (int i = 0; i < modes_; ++i) v *= G[base[i] + pm[i] * tabs_[i].c + pn[i]];
        s += v;
    }
    return s.real();
}

// ---------------- bounds ----------------

double het_bias_term(int m, int n, int p, double x) {
    double q = (1.0 + m) * (1.0 + n);
    if (!(x > 0) || x * x * q >= 1) {
        std::ostringstream os;
        os << "bias bound: convergence condition tau^2 (1+m)(1+n) < 1 violated at (m,n,tau) = (" << m << "," << n
           << "," << x << ")";
        throw ConfigError(os.str());
    }
    return std::pow(x, p) * std::pow(q, 0.5 * p) / std::sqrt(1 - x * x * q);
}

double het_bias_pair(const Index& m, const Index& n, const EstimatorConfig& cfg) {
    cfg.validate(static_cast<int>(m.size()));
    if (n.size() != m.size()) throw ConfigError("bias pair: index length mismatch");
    double x = cfg.eta == 1.0 ? cfg.tau : cfg.t();
    double prod = 1;
    for (std::size_t i = 0; i < m.size(); ++i) prod *= 1 + het_bias_term(m[i], n[i], cfg.p[i], x);
    return prod - 1;
}

double het_bias_bound(const CoreState& core, const EstimatorConfig& cfg) {
    cfg.validate(core.modes);
    double s = 0;
    for (const auto& [m, cm] : core.coeffs)
        for (const auto& [n, cn] : core.coeffs) s += std::abs(cm) * std::abs(cn) * het_bias_pair(m, n, cfg);
    return s;
}

double het_range_bound(const CoreState& core, const EstimatorConfig& cfg) {
    cfg.validate(core.modes);
    if (cfg.eta < 1.0) return het_range_numeric(core, cfg);
    double s = 0;
    for (const auto& [m, cm] : core.coeffs)
        for (const auto& [n, cn] : core.coeffs) {
            double prod = 1;
            for (int i = 0; i < core.modes; ++i) {
                int mx = std::max(m[i], n[i]), mn = std::min(m[i], n[i]);
                prod *= std::pow(cfg.tau, -1.0 - 0.5 * (m[i] + n[i])) * binom(mx + cfg.p[i], cfg.p[i] - 1) *
                        std::sqrt(std::pow(2.0, std::abs(m[i] - n[i])) * binom(mx, mn));
            }
            s += std::abs(cm) * std::abs(cn) * prod;
        }
    return s;
}

namespace {

// sup_z |f^eta_{a,b}(z; tau)|
double f_sup(int a, int b, double tau, double eta) {
    double s = eta * tau;
    if (s >= 1) {
        if (a == 0 && b == 0) return 1 / s;
        throw ConfigError("range: estimator unbounded at eta tau = 1");
    }
    return std::pow(eta, -0.5 * (a + b)) * std::pow(s, -1.0 - 0.5 * (a + b)) * laguerre_2d_envelope(b, a, 1 - s);
}

}  // namespace

double het_range_numeric(const CoreState& core, const EstimatorConfig& cfg) {
    cfg.validate(core.modes);
    double t = cfg.eta == 1.0 ? cfg.tau : cfg.t();
    double s = 0;
    for (const auto& [m, cm] : core.coeffs)
        for (const auto& [n, cn] : core.coeffs) {
            double prod = 1;
            for (int i = 0; i < core.modes; ++i) {
                double gi = 0;
                for (int j = 0; j < cfg.p[i]; ++j)
                    gi += std::pow(t, j) * g_weight(m[i], n[i], j) * f_sup(m[i] + j, n[i] + j, cfg.tau, cfg.eta);
                prod *= gi;
            }
            s += std::abs(cm) * std::abs(cn) * prod;
        }
    return s;
}

double het_tau_max(const CoreState& core, const EstimatorConfig& cfg) {
    double tmax = 1.0 / (1 + core.max_photons());
    if (cfg.eta == 1.0) return std::min(1.0, tmax);
    double e = cfg.eta;
    return std::max(0.0, std::min((tmax - 1 + e) / (e * e), 1 / e));
}

int core_size(const CoreState& core) { return core.max_photons() + 1; }

double hom_range_bound(const CoreState& core) { return kKInf * std::pow(core_size(core), 10.0 / 3.0); }

}  // namespace cvv
