#include "cvverify/experiments.hpp"

#include "cvverify/gaussian.hpp"
#include "cvverify/measure.hpp"
#include "cvverify/protocols.hpp"
#include "cvverify/witness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cvv {

void ExperimentConfig::validate() const {
    if (id != "example1" && id != "example2" && id != "example3")
        throw ConfigError("experiment: unknown id '" + id + "'");
    if (eta_grid.empty()) throw ConfigError("experiment: empty eta grid");
    for (double e : eta_grid)
        if (!(e >= 0 && e <= 1)) throw ConfigError("experiment: eta outside [0,1]");
    if (family < 1) throw ConfigError("experiment: family must be >= 1");
    if (!(eps_v >= 0)) throw ConfigError("experiment: eps_v must be >= 0");
    if (cutoff < 2) throw ConfigError("experiment: cutoff must be >= 2 (single photons)");
    if (sampled > 0) {
        if (!(tau > 0 && tau < 1)) throw ConfigError("experiment: tau outside (0,1)");
        if (p < 1) throw ConfigError("experiment: p must be >= 1");
        if (!(delta > 0 && delta < 1)) throw ConfigError("experiment: delta outside (0,1)");
    }
}

const std::vector<double>& Curves::col(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return cols[i];
    throw ConfigError("curves: no column '" + name + "'");
}

namespace {

// per block: probability that each of its modes holds exactly one photon
struct SectorStats {
    std::vector<double> block_prob;
    double full = 0;
    double leak = 0;
};

SectorStats sector_stats(const CVec& amps, const std::vector<Index>& basis, const std::vector<Partition>& parts,
                         int cutoff) {
    SectorStats s;
    std::size_t nb = 0;
    for (const auto& P : parts) nb += P.blocks.size();
    s.block_prob.assign(nb, 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        double w = std::norm(amps(static_cast<Eigen::Index>(i)));
        const Index& n = basis[i];
        if (*std::max_element(n.begin(), n.end()) >= cutoff) {
            s.leak += w;
            continue;
        }
        std::size_t k = 0;
        for (const auto& P : parts)
            for (const auto& b : P.blocks) {
                bool ones = true;
                for (int md : b) ones = ones && n[md] == 1;
                if (ones) s.block_prob[k] += w;
                ++k;
            }
        if (std::all_of(n.begin(), n.end(), [](int v) { return v == 1; })) s.full += w;
    }
    return s;
}

CMat bs_product(const std::vector<std::pair<int, int>>& order, double eta_bs, int m) {
    double th = beamsplitter_theta(eta_bs);
    RMat U = RMat::Identity(m, m);
    for (const auto& pr : order) U = beamsplitter(th, pr, m) * U;
    return U.cast<cplx>();
}

struct PairExample {
    std::string title;
    Index input;
    std::vector<std::pair<int, int>> circuit;  // applied in order
    int cutoff;
    Partition correlated, anti;
    std::string cname, aname;
};

Curves run_pairs(const ExperimentConfig& cfg, const PairExample& ex) {
    cfg.validate();
    const int m = 4;
    CoreState target = fock_core(ex.input);
    DensityOp in = embed(density_from_pure(target), std::vector<int>(m, ex.cutoff));
    Partition P1 = Partition::uniform(m, 1);
    std::vector<CoreState> tc = factor_target(target, ex.correlated);
    std::size_t G = cfg.eta_grid.size();

    Curves c;
    c.title = ex.title;
    c.grid = cfg.eta_grid;
    c.names = {"F", ex.cname, ex.aname, "W1"};
    if (cfg.sampled > 0) {
        c.names.push_back(ex.cname + "_sampled");
        c.names.push_back(ex.cname + "_eps");
    }
    c.cols.assign(c.names.size(), std::vector<double>(G, 0.0));
    parallel_blocks(G, [&](std::size_t g) {
        GaussianCircuit circ = GaussianCircuit::identity(m);
        circ.U = bs_product(ex.circuit, cfg.eta_grid[g], m);
        DensityOp out = apply_circuit(in, circ, std::vector<int>(m, ex.cutoff));
        c.cols[0][g] = fidelity_pure(out, target);
        c.cols[1][g] = exact_witness(out, target, ex.correlated);
        c.cols[2][g] = exact_witness(out, target, ex.anti);
        c.cols[3][g] = exact_witness(out, target, P1);
        if (cfg.sampled > 0) {
            SampleBatch b = sample_heterodyne(out, cfg.sampled, derive_seed(cfg.seed, g));
            EstimatorConfig ec;
            ec.p = std::vector<int>(2, cfg.p);
            ec.tau = cfg.tau;
            std::vector<EstimatorConfig> cfgs(ex.correlated.blocks.size(), ec);
            WitnessReport r = protocol4(b, tc, GaussianCircuit::identity(m), ex.correlated, cfgs, cfg.delta);
            c.cols[4][g] = r.value;
            c.cols[5][g] = r.epsilon();
        }
    });
    return c;
}

}  // namespace

Curves run_example1(const ExperimentConfig& cfg) {
    cfg.validate();
    const int m = 6;
    std::vector<Partition> parts = {Partition::uniform(m, 1), Partition::uniform(m, 2), Partition::uniform(m, 3)};
    CMat U = random_passive(m, cfg.seed);
    const std::size_t F = static_cast<std::size_t>(cfg.family);
    const int nsub = 1 << m;

    // per family member and surviving-photon subset: block one-photon probabilities
    std::vector<std::vector<SectorStats>> stats(F, std::vector<SectorStats>(nsub));
    std::vector<double> leaks(F, 0.0);
    parallel_blocks(F, [&](std::size_t j) {
        CMat V = random_near_identity(m, cfg.eps_v, derive_seed(cfg.seed, 1000 + j));
        // the back-propagated frame sees U^dagger V U; loss commutes with the passive part
        CMat W = U.adjoint() * V * U;
        for (int S = 0; S < nsub; ++S) {
            Index s(m, 0);
            for (int i = 0; i < m; ++i) s[i] = (S >> i) & 1;
            int N = photon_number(s);
            auto basis = sector_basis(m, N);
            CVec a = N == 0 ? CVec::Ones(1) : passive_apply_fock(W, s);
            stats[j][S] = sector_stats(a, basis, parts, cfg.cutoff);
            leaks[j] = std::max(leaks[j], stats[j][S].leak);
        }
    });
    double leak = *std::max_element(leaks.begin(), leaks.end());
    if (leak > 1e-6) {
        std::ostringstream os;
        os << "example1: cutoff " << cfg.cutoff << " drops probability " << leak << " (> 1e-6); raise the cutoff";
        throw NumericalError(os.str());
    }

    Curves c;
    c.title = "Example 1: lossy 6-mode boson sampling";
    c.grid = cfg.eta_grid;
    c.names = {"F", "W1", "W2", "W3"};
    std::size_t G = c.grid.size();
    c.cols.assign(4, std::vector<double>(G, 0.0));
    parallel_blocks(G, [&](std::size_t g) {
        double eta = c.grid[g];
        std::vector<double> wS(nsub);
        for (int S = 0; S < nsub; ++S) {
            int k = __builtin_popcount(static_cast<unsigned>(S));
            wS[S] = std::pow(eta, k) * std::pow(1 - eta, m - k);
        }
        std::vector<double> acc(4, 0.0);
        for (std::size_t j = 0; j < F; ++j) {
            std::vector<double> bp(stats[j][0].block_prob.size(), 0.0);
            double full = 0;
            for (int S = 0; S < nsub; ++S) {
                for (std::size_t b = 0; b < bp.size(); ++b) bp[b] += wS[S] * stats[j][S].block_prob[b];
                full += wS[S] * stats[j][S].full;
            }
            acc[0] += full;
            std::size_t k = 0;
            for (std::size_t pi = 0; pi < parts.size(); ++pi) {
                std::vector<double> fb(bp.begin() + k, bp.begin() + k + parts[pi].blocks.size());
                k += parts[pi].blocks.size();
                acc[pi + 1] += witness_from_fidelities(fb, parts[pi]);
            }
        }
        for (int i = 0; i < 4; ++i) c.cols[i][g] = acc[i] / static_cast<double>(F);
    });
    return c;
}

Curves run_example2(const ExperimentConfig& cfg) {
    PairExample ex;
    ex.title = "Example 2: |1010> through BS(1,2), BS(3,4)";
    ex.input = {1, 0, 1, 0};
    ex.circuit = {{0, 1}, {2, 3}};
    ex.cutoff = 2;
    ex.correlated = Partition::parse("1,2|3,4", 4);
    ex.anti = Partition::parse("1,3|2,4", 4);
    ex.cname = "W2_12_34";
    ex.aname = "W2_13_24";
    return run_pairs(cfg, ex);
}

Curves run_example3(const ExperimentConfig& cfg) {
    PairExample ex;
    ex.title = "Example 3: |1001> through BS(1,2), BS(3,4), BS(2,3)";
    ex.input = {1, 0, 0, 1};
    ex.circuit = {{0, 1}, {2, 3}, {1, 2}};
    ex.cutoff = 3;
    ex.correlated = Partition::parse("1,2|3,4", 4);
    ex.anti = Partition::parse("1,4|2,3", 4);
    ex.cname = "W2_12_34";
    ex.aname = "W2_14_23";
    return run_pairs(cfg, ex);
}

Curves run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.id == "example1") return run_example1(cfg);
    if (cfg.id == "example2") return run_example2(cfg);
    return run_example3(cfg);
}

double zero_crossing(const std::vector<double>& grid, const std::vector<double>& y) {
    if (grid.size() != y.size() || grid.empty()) throw ConfigError("zero_crossing: size mismatch");
    if (y[0] >= 0) return grid[0];
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] >= 0) return grid[i - 1] + (grid[i] - grid[i - 1]) * (-y[i - 1]) / (y[i] - y[i - 1]);
    return std::numeric_limits<double>::quiet_NaN();
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string xml(const std::string& s) {
    std::string o;
    for (char ch : s) {
        if (ch == '<') o += "&lt;";
        else if (ch == '>') o += "&gt;";
        else if (ch == '&') o += "&amp;";
        else o += ch;
    }
    return o;
}

}  // namespace

std::string curves_csv(const Curves& c) {
    std::ostringstream os;
    os << "eta";
    for (const auto& n : c.names) os << ',' << n;
    os << '\n';
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        os << num(c.grid[i]);
        for (const auto& col : c.cols) os << ',' << num(col[i]);
        os << '\n';
    }
    return os.str();
}

std::string curves_svg(const Curves& c) {
    const double W = 640, H = 420, L = 60, R = 170, T = 40, B = 50;
    double lo = 0, hi = 1;
    for (std::size_t k = 0; k < c.cols.size(); ++k) {
        if (c.names[k].size() > 4 && c.names[k].substr(c.names[k].size() - 4) == "_eps") continue;
        for (double v : c.cols[k])
            if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    }
    lo = std::floor(lo * 4) / 4;
    double x0 = c.grid.front(), x1 = c.grid.back();
    if (x1 == x0) x1 = x0 + 1;
    auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto Y = [&](double y) { return H - B - (y - lo) / (hi - lo) * (H - T - B); };
    static const char* colors[] = {"#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << L << "\" y=\"20\" font-size=\"14\">" << xml(c.title) << "</text>\n";
    // axes
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double xv = x0 + (x1 - x0) * i / 5.0;
        os << "<text x=\"" << num(X(xv)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        double yv = lo + (hi - lo) * i / 4.0;
        os << "<text x=\"" << L - 6 << "\" y=\"" << num(Y(yv) + 4) << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
        os << "<line x1=\"" << L << "\" y1=\"" << num(Y(yv)) << "\" x2=\"" << W - R << "\" y2=\"" << num(Y(yv))
           << "\" stroke=\"#dddddd\"/>\n";
    }
    if (lo < 0)
        os << "<line x1=\"" << L << "\" y1=\"" << num(Y(0)) << "\" x2=\"" << W - R << "\" y2=\"" << num(Y(0))
           << "\" stroke=\"#888888\" stroke-dasharray=\"4,3\"/>\n";
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">eta</text>\n";

    int shown = 0;
    for (std::size_t k = 0; k < c.cols.size(); ++k) {
        const auto& n = c.names[k];
        if (n.size() > 4 && n.substr(n.size() - 4) == "_eps") continue;
        const char* col = colors[shown % 6];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < c.grid.size(); ++i)
            if (std::isfinite(c.cols[k][i])) os << num(X(c.grid[i])) << ',' << num(Y(c.cols[k][i])) << ' ';
        os << "\"/>\n";
        double ly = T + 10 + 18 * shown;
        os << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 40 << "\" y2=\"" << ly
           << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - R + 46 << "\" y=\"" << ly + 4 << "\">" << xml(n) << "</text>\n";
        ++shown;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace cvv
