#include "cvverify/oracle.hpp"

#include "cvverify/estimators.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace cvv::oracle {

namespace {

cplx ipow(cplx z, int n) {
    cplx r = 1.0;
    for (int i = 0; i < n; ++i) r *= z;
    return r;
}

struct Nodes {
    std::vector<double> x, w;
};

// composite Gauss-Legendre on [a,b]
Nodes panels(double a, double b, int npan, int order) {
    std::vector<double> gx, gw;
    gauss_legendre(order, gx, gw);
    Nodes n;
    double h = (b - a) / npan;
    for (int p = 0; p < npan; ++p) {
        double c = a + (p + 0.5) * h;
        for (int i = 0; i < order; ++i) {
            n.x.push_back(c + 0.5 * h * gx[i]);
            n.w.push_back(0.5 * h * gw[i]);
        }
    }
    return n;
}

// 2D nodes for one mode: alpha = r e^{i phi}, weight includes r dr dphi
struct Plane {
    std::vector<cplx> z;
    std::vector<double> w;
};

Plane plane_nodes(const QuadratureGrid& g) {
    Nodes r = panels(0.0, g.radius, g.panels, g.order);
    Plane p;
    for (std::size_t i = 0; i < r.x.size(); ++i)
        for (int k = 0; k < g.angular; ++k) {
            double phi = 2 * kPi * k / g.angular;
            p.z.push_back(std::polar(r.x[i], phi));
            p.w.push_back(r.w[i] * r.x[i] * 2 * kPi / g.angular);
        }
    return p;
}

template <class F>
cplx certified(const QuadratureGrid& grid, F&& eval) {
    cplx a = eval(grid);
    if (!grid.certify) return a;
    cplx b = eval(grid.doubled());
    if (std::abs(a - b) > grid.tol) {
        std::ostringstream os;
        os << std::setprecision(12) << "quadrature not converged: " << a << " vs " << b;
        throw NumericalError(os.str());
    }
    return b;
}

}  // namespace

QuadratureGrid QuadratureGrid::doubled() const {
    QuadratureGrid g = *this;
    g.panels *= 2;
    g.angular *= 2;
    return g;
}

cplx coherent_amplitude(int n, cplx alpha) {
    double lf = 0.5 * std::lgamma(n + 1.0);
    return std::exp(-0.5 * std::norm(alpha)) * ipow(alpha, n) / std::exp(lf);
}

double hermite_poly_function(int n, double x) {
    // H_n(x) = n! sum_m (-1)^m (2x)^{n-2m} / (m! (n-2m)!)
    double h = 0;
    for (int m = 0; 2 * m <= n; ++m) {
        double t = std::exp(std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - 2.0 * m + 1.0));
        t *= std::pow(2 * x, n - 2 * m);
        h += (m % 2) ? -t : t;
    }
    double norm = std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(kPi));
    return h * std::exp(-0.5 * x * x) / norm;
}

double q_brute(const DensityOp& rho, const std::vector<cplx>& alpha) {
    if (static_cast<int>(alpha.size()) != rho.modes) throw ConfigError("q_brute: mode mismatch");
    std::size_t D = rho.dim();
    std::vector<cplx> amp(D);  // <r|alpha>
    for (std::size_t r = 0; r < D; ++r) {
        Index idx = multi_index(r, rho.cutoffs);
        cplx a = 1.0;
        for (int i = 0; i < rho.modes; ++i) a *= coherent_amplitude(idx[i], alpha[i]);
        amp[r] = a;
    }
    cplx s = 0;
    for (std::size_t r = 0; r < D; ++r)
        for (std::size_t c = 0; c < D; ++c) s += std::conj(amp[r]) * rho.matrix(r, c) * amp[c];
    return s.real() / std::pow(kPi, rho.modes);
}

double homodyne_pdf_brute(const DensityOp& rho, double x, double theta) {
    if (rho.modes != 1) throw ConfigError("homodyne_pdf_brute: single mode only");
    int c = rho.cutoffs[0];
    cplx s = 0;
    for (int m = 0; m < c; ++m)
        for (int n = 0; n < c; ++n)
            s += rho.matrix(m, n) * std::exp(-kI * double(m - n) * theta) * hermite_poly_function(m, x) *
                 hermite_poly_function(n, x);
    return s.real();
}

double w_function(const DensityOp& rho, cplx alpha, double s) {
    if (rho.modes != 1) throw ConfigError("w_function: single mode only");
    if (!(s < 1)) throw ConfigError("w_function: s must be < 1");
    int c = rho.cutoffs[0];
    double k = 2.0 / (1.0 - s);
    double a2 = std::norm(alpha);
    cplx tot = 0;
    for (int m = 0; m < c; ++m)
        for (int n = 0; n < c; ++n) {
            if (rho.matrix(m, n) == cplx(0)) continue;
            cplx sum = 0;
            for (int q = 0; q <= std::min(m, n); ++q) {
                double coef = std::sqrt(std::tgamma(m + 1.0) * std::tgamma(n + 1.0)) /
                              (std::tgamma(q + 1.0) * std::tgamma(m - q + 1.0) * std::tgamma(n - q + 1.0));
                if (q % 2) coef = -coef;
                sum += coef * std::pow((1 - s * s) / 4.0, q) * ipow(alpha, n - q) * ipow(std::conj(alpha), m - q);
            }
            tot += rho.matrix(m, n) * std::pow(k, m + n + 1) * std::exp(-k * a2) * sum / kPi;
        }
    return tot.real();
}

cplx exact_expectation_heterodyne(const DensityOp& rho, const HetFn& g, const QuadratureGrid& grid) {
    return certified(grid, [&](const QuadratureGrid& gr) {
        Plane p = plane_nodes(gr);
        int m = rho.modes;
        std::size_t n1 = p.z.size();
        std::size_t total = 1;
        for (int i = 0; i < m; ++i) total *= n1;
        cplx s = 0;
        std::vector<cplx> a(m);
        for (std::size_t t = 0; t < total; ++t) {
            std::size_t rem = t;
            double w = 1;
            for (int i = m - 1; i >= 0; --i) {
                std::size_t k = rem % n1;
                rem /= n1;
                a[i] = p.z[k];
                w *= p.w[k];
            }
            s += w * q_brute(rho, a) * g(a);
        }
        return s;
    });
}

cplx exact_expectation_w(const DensityOp& rho, const std::function<cplx(cplx)>& g, double s,
                         const QuadratureGrid& grid) {
    return certified(grid, [&](const QuadratureGrid& gr) {
        Plane p = plane_nodes(gr);
        cplx tot = 0;
        for (std::size_t k = 0; k < p.z.size(); ++k) tot += p.w[k] * w_function(rho, p.z[k], s) * g(p.z[k]);
        return tot;
    });
}

cplx exact_expectation_heterodyne_separable(const DensityOp& rho, const std::vector<ProductTerm>& terms,
                                            const QuadratureGrid& grid) {
    return certified(grid, [&](const QuadratureGrid& gr) {
        Plane p = plane_nodes(gr);
        int m = rho.modes;
        std::size_t D = rho.dim();
        std::vector<Index> idx(D);
        for (std::size_t r = 0; r < D; ++r) idx[r] = multi_index(r, rho.cutoffs);
        cplx total = 0;
        for (const auto& term : terms) {
            if (static_cast<int>(term.factors.size()) != m) throw ConfigError("separable term: mode mismatch");
            // I_i(a,b) = int <alpha|a><b|alpha> g_i(alpha) d^2alpha / pi
            std::vector<CMat> I(m);
            for (int i = 0; i < m; ++i) {
                int c = rho.cutoffs[i];
                I[i] = CMat::Zero(c, c);
                for (std::size_t k = 0; k < p.z.size(); ++k) {
                    cplx gv = term.factors[i](p.z[k]) * p.w[k] / kPi;
                    for (int a = 0; a < c; ++a) {
                        cplx la = std::conj(coherent_amplitude(a, p.z[k]));
                        for (int b = 0; b < c; ++b) I[i](a, b) += la * coherent_amplitude(b, p.z[k]) * gv;
                    }
                }
            }
            cplx s = 0;
            for (std::size_t r = 0; r < D; ++r)
                for (std::size_t c = 0; c < D; ++c) {
                    cplx v = rho.matrix(r, c);
                    if (v == cplx(0)) continue;
                    for (int i = 0; i < m; ++i) v *= I[i](idx[r][i], idx[c][i]);
                    s += v;
                }
            total += term.coef * s;
        }
        return total;
    });
}

cplx exact_expectation_homodyne(const DensityOp& rho, const HomFn& g, const QuadratureGrid& grid) {
    return certified(grid, [&](const QuadratureGrid& gr) {
        Nodes xs = panels(-gr.radius, gr.radius, 2 * gr.panels, gr.order);
        cplx tot = 0;
        for (int t = 0; t < gr.angular; ++t) {
            double th = 2 * kPi * t / gr.angular;
            for (std::size_t i = 0; i < xs.x.size(); ++i)
                tot += xs.w[i] * homodyne_pdf_brute(rho, xs.x[i], th) * g(xs.x[i], th);
        }
        return tot / double(gr.angular);
    });
}

double noisy_pdf_by_convolution(const DensityOp& rho, double x, double theta, double eta) {
    if (!(eta > 0 && eta <= 1)) throw ConfigError("eta must be in (0,1]");
    if (eta == 1.0) return homodyne_pdf_brute(rho, x, theta);
    double var = (1 - eta) / (2 * eta);
    double sd = std::sqrt(var);
    // integrate P(x') N(x - x'; var) over x' around x
    Nodes n = panels(x - 12 * sd, x + 12 * sd, 24, 16);
    double s = 0;
    for (std::size_t i = 0; i < n.x.size(); ++i) {
        double d = x - n.x[i];
        s += n.w[i] * homodyne_pdf_brute(rho, n.x[i], theta) * std::exp(-d * d / (2 * var)) /
             std::sqrt(2 * kPi * var);
    }
    return s;
}

cplx exact_expectation_homodyne_noisy(const DensityOp& rho, const HomFn& g, double eta, const QuadratureGrid& grid) {
    return certified(grid, [&](const QuadratureGrid& gr) {
        Nodes xs = panels(-gr.radius, gr.radius, 2 * gr.panels, gr.order);
        cplx tot = 0;
        for (int t = 0; t < gr.angular; ++t) {
            double th = 2 * kPi * t / gr.angular;
            for (std::size_t i = 0; i < xs.x.size(); ++i)
                tot += xs.w[i] * noisy_pdf_by_convolution(rho, xs.x[i], th, eta) * g(xs.x[i], th);
        }
        return tot / double(gr.angular);
    });
}

DensityOp brute_partial_trace(const DensityOp& rho, const std::vector<int>& keep) {
    std::vector<int> kc;
    for (int k : keep) kc.push_back(rho.cutoffs.at(k));
    std::vector<bool> kept(rho.modes, false);
    for (int k : keep) kept[k] = true;
    std::size_t Dk = total_dim(kc);
    CMat out = CMat::Zero(Dk, Dk);
    std::size_t D = rho.dim();
    for (std::size_t r = 0; r < D; ++r) {
        Index ir = multi_index(r, rho.cutoffs);
        for (std::size_t c = 0; c < D; ++c) {
            Index ic = multi_index(c, rho.cutoffs);
            bool same = true;
            for (int i = 0; i < rho.modes; ++i)
                if (!kept[i] && ir[i] != ic[i]) {
                    same = false;
                    break;
                }
            if (!same) continue;
            Index kr, kcol;
            for (int k : keep) {
                kr.push_back(ir[k]);
                kcol.push_back(ic[k]);
            }
            out(flat_index(kr, kc), flat_index(kcol, kc)) += rho.matrix(r, c);
        }
    }
    DensityOp o;
    o.modes = static_cast<int>(keep.size());
    o.cutoffs = kc;
    o.matrix = out;
    return o;
}

double brute_fidelity(const DensityOp& rho, const CoreState& psi) {
    cplx s = 0;
    for (const auto& [ri, ra] : psi.coeffs) {
        bool rin = true;
        for (int i = 0; i < rho.modes; ++i) rin = rin && ri[i] < rho.cutoffs[i];
        if (!rin) continue;
        for (const auto& [ci, ca] : psi.coeffs) {
            bool cin = true;
            for (int i = 0; i < rho.modes; ++i) cin = cin && ci[i] < rho.cutoffs[i];
            if (!cin) continue;
            s += std::conj(ra) * rho.matrix(flat_index(ri, rho.cutoffs), flat_index(ci, rho.cutoffs)) * ca;
        }
    }
    return s.real();
}

double brute_witness(const DensityOp& rho, const std::vector<CoreState>& factors, const Partition& P) {
    double w = 1;
    for (std::size_t b = 0; b < P.blocks.size(); ++b)
        w -= 1 - brute_fidelity(brute_partial_trace(rho, P.blocks[b]), factors[b]);
    return w;
}

DensityOp random_density(const std::vector<int>& cutoffs, std::uint64_t seed, int rank) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::size_t D = total_dim(cutoffs);
    int r = rank > 0 ? rank : static_cast<int>(D);
    CMat G(D, r);
    for (std::size_t i = 0; i < D; ++i)
        for (int j = 0; j < r; ++j) G(i, j) = cplx(nd(rng), nd(rng));
    CMat m = G * G.adjoint();
    m /= m.trace().real();
    DensityOp o;
    o.modes = static_cast<int>(cutoffs.size());
    o.cutoffs = cutoffs;
    o.matrix = 0.5 * (m + m.adjoint());
    return o;
}

CoreState random_core(const std::vector<int>& cutoffs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::size_t D = total_dim(cutoffs);
    AmplitudeMap mp;
    for (std::size_t i = 0; i < D; ++i) mp[multi_index(i, cutoffs)] = cplx(nd(rng), nd(rng));
    return make_core_state(mp);
}

// ---------------- sweep report ----------------

std::string Report::table() const {
    std::ostringstream os;
    os << std::left << std::setw(44) << "sweep" << std::setw(8) << "trials" << std::setw(12) << "violations"
       << std::setw(16) << "worst slack" << "status\n";
    for (const auto& r : rows) {
        bool ok = r.violations == 0;
        os << std::left << std::setw(44) << r.name << std::setw(8) << r.trials << std::setw(12) << r.violations
           << std::setw(16) << std::setprecision(6) << r.worst_slack
           << (ok ? "ok" : (r.expect_clean ? "VIOLATED" : "violated (known)"));
        if (!r.note.empty()) os << "  " << r.note;
        os << "\n";
    }
    return os.str();
}

std::string Report::json() const {
    std::ostringstream os;
    os << std::setprecision(17) << "{\"rows\":[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << (i ? "," : "") << "{\"name\":\"" << r.name << "\",\"trials\":" << r.trials
           << ",\"violations\":" << r.violations << ",\"worst_slack\":" << r.worst_slack
           << ",\"expect_clean\":" << (r.expect_clean ? "true" : "false") << ",\"note\":\"" << r.note << "\"}";
    }
    os << "],\"all_clean\":" << (all_clean() ? "true" : "false") << "}";
    return os.str();
}

bool Report::all_clean() const {
    for (const auto& r : rows)
        if (r.expect_clean && r.violations > 0) return false;
    return true;
}

namespace {

void record(SweepRow& row, double slack, double tol = 0.0) {
    row.trials++;
    if (slack < -tol) row.violations++;
    if (row.trials == 1 || slack < row.worst_slack) row.worst_slack = slack;
}

struct HetCfg {
    int p;
    double tau;
};
const HetCfg kBiasConfigs[3] = {{1, 0.3}, {2, 0.35}, {3, 0.3}};

}  // namespace

Report empirical_vs_bound_report(const ReportOptions& opt) {
    Report rep;
    QuadratureGrid grid;
    grid.tol = 1e-9;

    // heterodyne bias: element level, 1 and 2 modes
    {
        SweepRow row;
        row.name = "heterodyne bias dominance (elements)";
        SweepRow frow;
        frow.name = "heterodyne bias dominance (fidelity)";
        for (int s = 0; s < opt.bias_states; ++s) {
            bool two = s % 2 == 1;
            std::vector<int> cut = two ? std::vector<int>{4, 4} : std::vector<int>{6};
            DensityOp rho = random_density(cut, opt.seed * 1000 + s);
            int k = two ? 2 : 1;
            CoreState target = random_core(std::vector<int>(k, 2), opt.seed * 7000 + s);
            for (const auto& hc : kBiasConfigs) {
                EstimatorConfig cfg{std::vector<int>(k, hc.p), hc.tau, 1.0};
                std::vector<ProductTerm> fid_terms;
                for (std::size_t e = 0; e < (1u << (2 * k)); ++e) {
                    Index m(k), n(k);
                    for (int i = 0; i < k; ++i) {
                        m[i] = (e >> (2 * i)) & 1;
                        n[i] = (e >> (2 * i + 1)) & 1;
                    }
                    ProductTerm t{1.0, {}};
                    for (int i = 0; i < k; ++i) {
                        int mi = m[i], ni = n[i];
                        t.factors.push_back([=](cplx z) { return het_g(mi, ni, hc.p, z, hc.tau); });
                    }
                    cplx ex = exact_expectation_heterodyne_separable(rho, {t}, grid);
                    cplx el = rho.matrix(flat_index(m, cut), flat_index(n, cut));
                    record(row, het_bias_pair(m, n, cfg) - std::abs(ex - el), 1e-9);
                    t.coef = std::conj(target.amplitude(m)) * target.amplitude(n);
                    if (t.coef != cplx(0)) fid_terms.push_back(t);
                }
                double F = fidelity_pure(rho, target);
                cplx ex = exact_expectation_heterodyne_separable(rho, fid_terms, grid);
                record(frow, het_bias_bound(target, cfg) - std::abs(ex - F), 1e-9);
            }
        }
        rep.rows.push_back(row);
        rep.rows.push_back(frow);
    }

    // known gap of the E-term bound for p >= 2 near the convergence limit
    {
        SweepRow row;
        row.name = "E-term bound at p=3, tau=0.5, rho=|4>";
        row.expect_clean = false;
        DensityOp rho = density_from_pure(fock_core({4}));
        EstimatorConfig cfg{{3}, 0.5, 1.0};
        ProductTerm t{1.0, {[](cplx z) { return het_g(0, 0, 3, z, 0.5); }}};
        cplx ex = exact_expectation_heterodyne_separable(rho, {t}, grid);
        record(row, het_bias_pair({0}, {0}, cfg) - std::abs(ex));
        row.note = "dropped binomial C(q-1,p-1) in the HS-norm step";
        rep.rows.push_back(row);
    }

    // range dominance
    {
        SweepRow row;
        row.name = "heterodyne range dominance";
        std::mt19937_64 rng(opt.seed + 99);
        std::normal_distribution<double> nd;
        for (int c = 0; c < opt.range_cores; ++c) {
            int k = 1 + c % 2;
            CoreState core = random_core(std::vector<int>(k, 2 + (c / 2) % 2), opt.seed * 31 + c);
            EstimatorConfig cfg{std::vector<int>(k, 1 + c % 3), 0.0, 1.0};
            double tmax = het_tau_max(core, cfg);
            std::uniform_real_distribution<double> ut(0.05, std::min(0.95, tmax));
            cfg.tau = ut(rng);
            double R = het_range_bound(core, cfg);
            double worst = 0;
            std::vector<cplx> a(k);
            for (std::size_t i = 0; i < opt.range_points; ++i) {
                double sc = 0.5 + 2.5 * (i % 4) / 3.0;
                for (int j = 0; j < k; ++j) a[j] = sc * cplx(nd(rng), nd(rng));
                worst = std::max(worst, std::abs(het_g_kmode(core, a, cfg)));
            }
            record(row, R - worst);
        }
        rep.rows.push_back(row);
    }

    // witness sandwich
    {
        SweepRow row;
        row.name = "witness sandwich (4 modes, k=1,2,4)";
        for (int s = 0; s < opt.sandwich_states; ++s) {
            DensityOp rho = random_density({3, 3, 3, 3}, opt.seed * 5000 + s, 1 + s % 4);
            CoreState t = random_core({3}, opt.seed + 4 * s);
            for (int i = 1; i < 4; ++i) t = tensor(t, random_core({3}, opt.seed + 4 * s + i));
            for (int k : {1, 2, 4}) {
                auto c = check_sandwich(rho, t, Partition::uniform(4, k));
                record(row, std::min({c.lower_slack, c.upper_slack, c.ordering_slack}), 1e-10);
            }
        }
        rep.rows.push_back(row);
    }

    // homodyne unbiasedness
    {
        SweepRow row;
        row.name = "homodyne unbiasedness (k,l <= 2)";
        const double r = 1 / std::sqrt(2.0);
        std::vector<CoreState> states = {make_core_state(std::vector<cplx>{1.0}),
                                         make_core_state(std::vector<cplx>{0.0, 1.0}),
                                         make_core_state(std::vector<cplx>{0.0, 0.0, 1.0}),
                                         make_core_state(std::vector<cplx>{r, kI * r})};
        QuadratureGrid hg;
        hg.tol = 1e-7;
        for (const auto& st : states) {
            DensityOp rho = embed(density_from_pure(st), {4});
            for (int k = 0; k <= 2; ++k)
                for (int l = 0; l <= 2; ++l) {
                    cplx ex = exact_expectation_homodyne(
                        rho, [&](double x, double th) { return hom_element(k, l, x, th); }, hg);
                    record(row, 1e-5 - std::abs(ex - rho.matrix(k, l)));
                }
        }
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace cvv::oracle
