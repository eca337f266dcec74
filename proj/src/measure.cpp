#include "cvverify/measure.hpp"

#include "cvverify/gaussian.hpp"
#include "cvverify/special.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cvv {

namespace {

void check_eta(double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in (0,1]");
}

// <n|alpha> for n < cut
std::vector<cplx> coherent_column(cplx a, int cut) {
    std::vector<cplx> c(cut);
    c[0] = std::exp(-0.5 * std::norm(a));
    for (int n = 1; n < cut; ++n) c[n] = c[n - 1] * a / std::sqrt(double(n));
    return c;
}

// sum_{r,c} b_r rho_rc conj(b_c) with b = per-mode product amplitudes
double sandwich(const DensityOp& rho, const std::vector<std::vector<cplx>>& per_mode) {
    std::size_t d = rho.dim();
    CVec b(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        Index k = multi_index(i, rho.cutoffs);
        cplx v = 1;
        for (int m = 0; m < rho.modes; ++m) v *= per_mode[m][k[m]];
        b(static_cast<Eigen::Index>(i)) = v;
    }
    cplx s = b.transpose() * rho.matrix * b.conjugate();
    return std::max(0.0, s.real());
}

struct Split {
    std::vector<detail::PureComponent> comps;
    std::vector<double> cdf;
    double acceptance = 0;
};

// rho = sum_j v_j v_j^dagger by pivoted Cholesky; any pure decomposition works for the mixture
Split decompose(const DensityOp& rho) {
    rho.validate(false);
    const CMat& A = rho.matrix;
    Eigen::Index d = A.rows();
    RVec diag = A.diagonal().real();
    if (diag.minCoeff() < -1e-9) throw ConfigError("sampler: state is not positive semidefinite");
    double tr = diag.sum();
    std::vector<CVec> L;
    Split s;
    std::vector<double> w;
    double tot = 0;
    while (true) {
        Eigen::Index piv;
        double dmax = diag.maxCoeff(&piv);
        if (dmax <= 1e-14 * tr) break;
        CVec col = A.col(piv);
        for (const auto& l : L) col -= l * std::conj(l(piv));
        col /= std::sqrt(dmax);
        for (Eigen::Index i = 0; i < d; ++i) diag(i) -= std::norm(col(i));
        diag(piv) = 0;
        if (diag.minCoeff() < -1e-8 * tr) throw ConfigError("sampler: state is not positive semidefinite");
        L.push_back(col);
        double nrm = col.norm();
        CVec v = col / nrm;
        double vmax = v.cwiseAbs().maxCoeff();
        detail::PureComponent c;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (std::abs(v(i)) <= 1e-14 * vmax) continue;
            Index k = multi_index(static_cast<std::size_t>(i), rho.cutoffs);
            c.idx.push_back(k);
            c.amp.push_back(v(i));
            c.nphot.push_back(photon_number(k));
            c.S += std::abs(v(i));
            c.cdf.push_back(c.S);
        }
        for (auto& x : c.cdf) x /= c.S;
        c.cdf.back() = 1.0;
        s.comps.push_back(std::move(c));
        w.push_back(nrm * nrm);
        tot += nrm * nrm;
        if (static_cast<Eigen::Index>(L.size()) == d) break;
    }
    if (s.comps.empty()) throw ConfigError("sampler: state has no weight");
    double acc = 0, run = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        run += w[j] / tot;
        s.cdf.push_back(run);
        acc += (w[j] / tot) / (s.comps[j].S * s.comps[j].S);
    }
    s.cdf.back() = 1.0;
    s.acceptance = acc;
    if (acc < kAcceptanceFloor)
        throw NumericalError("sampler: rejection acceptance " + std::to_string(acc) +
                             " below floor; use a smaller cutoff or a less spread state");
    return s;
}

std::size_t pick(const std::vector<double>& cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

detail::SquareTable square_table(int n) {
    detail::SquareTable t;
    double L = std::sqrt(2.0 * n + 1) + 9;
    t.h = 2e-3;
    int cells = static_cast<int>(std::ceil(2 * L / t.h));
    t.x0 = -0.5 * cells * t.h;
    std::vector<double> gx, gw;
    gauss_legendre(4, gx, gw);
    t.F.assign(cells + 1, 0.0);
    for (int c = 0; c < cells; ++c) {
        double a = t.x0 + c * t.h, m = 0;
        for (int q = 0; q < 4; ++q) {
            double u = hermite_function(n, a + 0.5 * t.h * (gx[q] + 1));
            m += gw[q] * u * u;
        }
        t.F[c + 1] = t.F[c] + 0.5 * t.h * m;
    }
    double tot = t.F.back();
    for (auto& f : t.F) f /= tot;
    return t;
}

double draw(const detail::SquareTable& t, double u) {
    auto it = std::upper_bound(t.F.begin(), t.F.end(), u);
    std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - t.F.begin()), 1, t.F.size() - 1);
    double span = t.F[k] - t.F[k - 1];
    double f = span > 0 ? (u - t.F[k - 1]) / span : 0.5;
    return t.x0 + (static_cast<double>(k - 1) + f) * t.h;
}

constexpr long kMaxTries = 10000000;

}  // namespace

void SampleBatch::validate() const {
    if (modes <= 0) throw ConfigError("samples: mode count must be positive");
    check_eta(eta);
    for (double t : theta)
        if (!(t >= 0.0 && t < 2 * kPi)) throw ConfigError("samples: theta outside [0, 2pi)");
    if (kind == SampleKind::Homodyne) {
        if (static_cast<std::size_t>(x.rows()) != theta.size()) throw ConfigError("samples: one theta per shot");
        if (x.cols() != modes) throw ConfigError("samples: record length differs from mode count");
        if (alpha.size() != 0 || !xi.empty()) throw ConfigError("samples: heterodyne fields in a homodyne batch");
        if (!x.allFinite()) throw ConfigError("samples: non-finite outcome");
    } else {
        if (alpha.cols() != modes) throw ConfigError("samples: record length differs from mode count");
        if (!theta.empty() || x.size() != 0) throw ConfigError("samples: homodyne fields in a heterodyne batch");
        if (!xi.empty() && static_cast<int>(xi.size()) != modes) throw ConfigError("samples: one xi per mode");
        if (!alpha.allFinite()) throw ConfigError("samples: non-finite outcome");
    }
}

double homodyne_pdf(const DensityOp& rho, double theta, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != rho.modes) throw ConfigError("homodyne_pdf: one x per mode");
    std::vector<std::vector<cplx>> pm(rho.modes);
    for (int m = 0; m < rho.modes; ++m) {
        auto u = hermite_functions(rho.cutoffs[m] - 1, x[m]);
        for (int n = 0; n < rho.cutoffs[m]; ++n) pm[m].push_back(u[n] * std::exp(-kI * (n * theta)));
    }
    return sandwich(rho, pm);
}

double homodyne_pdf(const DensityOp& rho, double theta, double x) {
    return homodyne_pdf(rho, theta, std::vector<double>(rho.modes, x));
}

double noisy_homodyne_pdf(const DensityOp& rho, double theta, double x, double eta) {
    check_eta(eta);
    if (rho.modes != 1) throw ConfigError("noisy_homodyne_pdf: single mode only");
    if (eta == 1.0) return homodyne_pdf(rho, theta, x);
    double se = std::sqrt(eta);
    return se * homodyne_pdf(loss_channel(rho, {eta}), theta, se * x);
}

double husimi_q(const DensityOp& rho, const std::vector<cplx>& alpha) {
    if (static_cast<int>(alpha.size()) != rho.modes) throw ConfigError("husimi_q: one alpha per mode");
    std::vector<std::vector<cplx>> pm(rho.modes);
    for (int m = 0; m < rho.modes; ++m) {
        pm[m] = coherent_column(alpha[m], rho.cutoffs[m]);
        for (auto& c : pm[m]) c = std::conj(c);
    }
    return sandwich(rho, pm) / std::pow(kPi, rho.modes);
}

HomodyneSampler::HomodyneSampler(const DensityOp& rho, double eta) : modes_(rho.modes), eta_(eta) {
    check_eta(eta);
    DensityOp r = eta < 1.0 ? loss_channel(rho, std::vector<double>(rho.modes, eta)) : rho;
    Split s = decompose(r);
    comps_ = std::move(s.comps);
    comp_cdf_ = std::move(s.cdf);
    cutoffs_ = r.cutoffs;
    int top = *std::max_element(cutoffs_.begin(), cutoffs_.end());
    for (int n = 0; n < top; ++n) tables_.push_back(square_table(n));
}

SampleBatch HomodyneSampler::sample(std::size_t n, std::uint64_t seed, ThetaPolicy policy, double fixed_theta) const {
    if (n == 0) throw ConfigError("sampler: n must be at least 1");
    if (policy == ThetaPolicy::Fixed && !(fixed_theta >= 0.0 && fixed_theta < 2 * kPi))
        throw ConfigError("sampler: fixed theta outside [0, 2pi)");
    SampleBatch b;
    b.kind = SampleKind::Homodyne;
    b.modes = modes_;
    b.eta = eta_;
    b.seed = seed;
    b.policy = policy;
    b.theta.assign(n, 0.0);
    b.x = RMat::Zero(static_cast<Eigen::Index>(n), modes_);
    std::size_t nb = (n + kShotBlock - 1) / kShotBlock;
    parallel_blocks(nb, [&](std::size_t blk) {
        std::mt19937_64 g(derive_seed(seed, blk));
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<double> xs(modes_);
        std::vector<std::vector<double>> u(modes_);
        std::size_t end = std::min(n, (blk + 1) * kShotBlock);
        for (std::size_t shot = blk * kShotBlock; shot < end; ++shot) {
            double th = fixed_theta;
            if (policy == ThetaPolicy::Uniform) {
                th = 2 * kPi * U(g);
                if (th >= 2 * kPi) th = 0.0;
            }
            const auto& c = comps_[pick(comp_cdf_, U(g))];
            std::vector<cplx> ph(c.amp.size());
            for (std::size_t e = 0; e < c.amp.size(); ++e) ph[e] = c.amp[e] * std::exp(-kI * (c.nphot[e] * th));
            bool ok = false;
            for (long tries = 0; tries < kMaxTries && !ok; ++tries) {
                const Index& k = c.idx[pick(c.cdf, U(g))];
                for (int m = 0; m < modes_; ++m) {
                    xs[m] = draw(tables_[k[m]], U(g));
                    u[m] = hermite_functions(cutoffs_[m] - 1, xs[m]);
                }
                cplx amp = 0;
                double env = 0;
                for (std::size_t e = 0; e < c.amp.size(); ++e) {
                    double p = 1;
                    for (int m = 0; m < modes_; ++m) p *= u[m][c.idx[e][m]];
                    amp += ph[e] * p;
                    env += std::abs(c.amp[e]) * p * p;
                }
                ok = U(g) * c.S * env <= std::norm(amp);
            }
            if (!ok) throw NumericalError("homodyne sampler: rejection loop did not terminate");
            b.theta[shot] = th;
            for (int m = 0; m < modes_; ++m) b.x(static_cast<Eigen::Index>(shot), m) = xs[m];
        }
    });
    return b;
}

HeterodyneSampler::HeterodyneSampler(const DensityOp& rho, const std::vector<cplx>& xi, double eta)
    : modes_(rho.modes), eta_(eta), xi_(xi) {
    check_eta(eta);
    if (!xi.empty() && static_cast<int>(xi.size()) != rho.modes) throw ConfigError("heterodyne: one xi per mode");
    DensityOp r = eta < 1.0 ? loss_channel(rho, std::vector<double>(rho.modes, eta)) : rho;
    bool unbalanced = std::any_of(xi.begin(), xi.end(), [](cplx z) { return z != cplx(0.0); });
    if (unbalanced) r = apply_antisqueeze(r, xi);
    Split s = decompose(r);
    comps_ = std::move(s.comps);
    comp_cdf_ = std::move(s.cdf);
    acceptance_ = s.acceptance;
    cutoffs_ = r.cutoffs;
}

SampleBatch HeterodyneSampler::sample(std::size_t n, std::uint64_t seed) const {
    if (n == 0) throw ConfigError("sampler: n must be at least 1");
    SampleBatch b;
    b.kind = SampleKind::Heterodyne;
    b.modes = modes_;
    b.eta = eta_;
    b.xi = xi_;
    b.seed = seed;
    b.alpha = CMat::Zero(static_cast<Eigen::Index>(n), modes_);
    // flat copies of the components for the inner loop
    struct Flat {
        std::vector<int> idx;
        std::vector<double> absamp;
    };
    std::vector<Flat> flat(comps_.size());
    for (std::size_t j = 0; j < comps_.size(); ++j) {
        for (std::size_t e = 0; e < comps_[j].amp.size(); ++e) {
            for (int m = 0; m < modes_; ++m) flat[j].idx.push_back(comps_[j].idx[e][m]);
            flat[j].absamp.push_back(std::abs(comps_[j].amp[e]));
        }
    }
    std::size_t nb = (n + kShotBlock - 1) / kShotBlock;
    parallel_blocks(nb, [&](std::size_t blk) {
        std::mt19937_64 g(derive_seed(seed, blk));
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<cplx> as(modes_);
        std::vector<std::vector<cplx>> co(modes_);
        for (int m = 0; m < modes_; ++m) co[m].resize(cutoffs_[m]);
        std::size_t end = std::min(n, (blk + 1) * kShotBlock);
        for (std::size_t shot = blk * kShotBlock; shot < end; ++shot) {
            std::size_t j = pick(comp_cdf_, U(g));
            const auto& c = comps_[j];
            const Flat& fl = flat[j];
            bool ok = false;
            for (long tries = 0; tries < kMaxTries && !ok; ++tries) {
                const Index& k = c.idx[pick(c.cdf, U(g))];
                for (int m = 0; m < modes_; ++m) {
                    // |alpha|^2 ~ Gamma(n+1), uniform phase: Q of |n>
                    double r;
                    if (k[m] < 16) {
                        // Gamma(n+1) as a sum of n+1 unit exponentials
                        double prod = 1.0 - U(g);
                        for (int q = 0; q < k[m]; ++q) prod *= 1.0 - U(g);
                        r = std::sqrt(-std::log(prod));
                    } else {
                        std::gamma_distribution<double> G(k[m] + 1.0, 1.0);
                        r = std::sqrt(G(g));
                    }
                    as[m] = std::polar(r, 2 * kPi * U(g));
                    auto& col = co[m];
                    col[0] = std::exp(-0.5 * r * r);
                    cplx ac = std::conj(as[m]);
                    for (int q = 1; q < cutoffs_[m]; ++q) col[q] = col[q - 1] * ac / std::sqrt(double(q));
                }
                cplx amp = 0;
                double env = 0;
                const int* ix = fl.idx.data();
                for (std::size_t e = 0; e < c.amp.size(); ++e, ix += modes_) {
                    cplx p = co[0][ix[0]];
                    for (int m = 1; m < modes_; ++m) p *= co[m][ix[m]];
                    amp += c.amp[e] * p;
                    env += fl.absamp[e] * std::norm(p);
                }
                ok = U(g) * c.S * env <= std::norm(amp);
            }
            if (!ok) throw NumericalError("heterodyne sampler: rejection loop did not terminate");
            for (int m = 0; m < modes_; ++m) b.alpha(static_cast<Eigen::Index>(shot), m) = as[m];
        }
    });
    return b;
}

SampleBatch sample_parallel_homodyne(const DensityOp& rho, std::size_t n, std::uint64_t seed, ThetaPolicy policy,
                                     double fixed_theta, double eta) {
    if (n == 0) throw ConfigError("sampler: n must be at least 1");
    return HomodyneSampler(rho, eta).sample(n, seed, policy, fixed_theta);
}

SampleBatch sample_heterodyne(const DensityOp& rho, std::size_t n, std::uint64_t seed, const std::vector<cplx>& xi,
                              double eta) {
    if (n == 0) throw ConfigError("sampler: n must be at least 1");
    return HeterodyneSampler(rho, xi, eta).sample(n, seed);
}

SampleBatch rescale_lossy(const SampleBatch& b) {
    if (b.rescaled || b.eta == 1.0) return b;
    SampleBatch r = b;
    double s = 1.0 / std::sqrt(b.eta);
    if (b.kind == SampleKind::Homodyne)
        r.x *= s;
    else
        r.alpha *= s;
    r.rescaled = true;
    return r;
}

}  // namespace cvv
