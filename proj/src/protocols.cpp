#include "cvverify/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cvv {

namespace {

// per-shot values written by shard, then one fixed-order pairwise sum
void shard_stats(std::size_t n, const std::function<double(std::size_t)>& f, double& mean, double& var) {
    std::vector<double> v(n), v2(n);
    std::size_t nb = (n + kShotBlock - 1) / kShotBlock;
    parallel_blocks(nb, [&](std::size_t b) {
        std::size_t end = std::min(n, (b + 1) * kShotBlock);
        for (std::size_t i = b * kShotBlock; i < end; ++i) v[i] = f(i);
    });
    mean = pairwise_sum(v.data(), n) / double(n);
    for (std::size_t i = 0; i < n; ++i) v2[i] = (v[i] - mean) * (v[i] - mean);
    var = n > 1 ? pairwise_sum(v2.data(), n) / double(n - 1) : 0.0;
}

void check_unit(double v, const char* what) {
    if (!(v > 0 && v < 1)) throw ConfigError(std::string(what) + " must lie in (0,1)");
}

bool is_zero(const std::vector<cplx>& xi) {
    return std::all_of(xi.begin(), xi.end(), [](cplx z) { return std::abs(z) <= 1e-12; });
}

bool same_xi(const std::vector<cplx>& a, const std::vector<cplx>& b, int m) {
    std::vector<cplx> pa = a.empty() ? std::vector<cplx>(m, 0.0) : a;
    std::vector<cplx> pb = b.empty() ? std::vector<cplx>(m, 0.0) : b;
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (std::abs(pa[i] - pb[i]) > 1e-12) return false;
    return true;
}

double homodyne_range(const CoreState& t, double eta) {
    if (eta == 1.0) return hom_range_bound(t);
    return NoisyHomodyneTable(core_size(t), eta).max_abs_sum();
}

// 1 - sum(1 - F_i); estimates may leave [0,1]
double combine(const std::vector<double>& F) {
    double w = 1;
    for (double f : F) w -= 1 - f;
    return w;
}

SampleBatch column(const SampleBatch& b, int m) {
    SampleBatch s = b;
    s.modes = 1;
    s.x = b.x.col(m);
    return s;
}

}  // namespace

double hoeffding_delta(std::size_t N, double lambda, double R) {
    if (!(R > 0) || !(lambda > 0)) throw ConfigError("hoeffding: lambda and R must be positive");
    return 2 * std::exp(-double(N) * lambda * lambda / (2 * R * R));
}

double hoeffding_lambda(std::size_t N, double delta, double R) {
    if (N == 0) throw ConfigError("hoeffding: N must be positive");
    check_unit(delta, "delta");
    return R * std::sqrt(2 * std::log(2 / delta) / double(N));
}

std::size_t hoeffding_samples(double lambda, double delta, double R) {
    check_unit(delta, "delta");
    if (!(lambda > 0)) throw ConfigError("hoeffding: lambda must be positive");
    double n = std::ceil(2 * R * R * std::log(2 / delta) / (lambda * lambda));
    if (!(n < 1e18)) throw NumericalError("hoeffding: sample count overflows");
    return static_cast<std::size_t>(n);
}

FidelityEstimate protocol1(const SampleBatch& batch, const CoreState& target, double epsilon) {
    if (batch.kind != SampleKind::Homodyne) throw ConfigError("protocol 1: homodyne samples required");
    if (batch.policy == ThetaPolicy::Fixed) throw ConfigError("protocol 1: fixed-theta batch rejected, theta must be uniform");
    if (batch.modes != 1 || target.modes != 1) throw ConfigError("protocol 1: single-mode batch and target required");
    if (!(epsilon > 0)) throw ConfigError("protocol 1: epsilon must be positive");
    batch.validate();
    if (batch.eta <= 0.5) throw ConfigError("protocol 1: homodyne estimators need eta > 1/2");
    SampleBatch b = rescale_lossy(batch);
    FidelityEstimate e;
    e.N = b.count();
    e.config.p.clear();
    e.config.tau = 0;
    e.config.eta = b.eta;
    if (b.eta == 1.0) {
        shard_stats(e.N, [&](std::size_t i) { return hom_g(target, b.x(i, 0), b.theta[i]); }, e.estimate,
                    e.sample_variance);
    } else {
        NoisyHomodyneTable tab(core_size(target), b.eta);
        shard_stats(e.N, [&](std::size_t i) { return tab.g(target, b.x(i, 0), b.theta[i]); }, e.estimate,
                    e.sample_variance);
    }
    e.range = homodyne_range(target, b.eta);
    e.lambda = epsilon;
    e.bias = 0;
    e.delta = hoeffding_delta(e.N, epsilon, e.range);
    return e;
}

WitnessReport protocol2(const SampleBatch& batch, const std::vector<CoreState>& targets, const HomodyneRule& rule,
                        double epsilon) {
    if (batch.kind != SampleKind::Homodyne) throw ConfigError("parallel homodyne required");
    int m = batch.modes;
    if (static_cast<int>(targets.size()) != m) throw ConfigError("protocol 2: one single-mode target per mode");
    SampleBatch bp = backprop_homodyne(batch, rule);
    WitnessReport r;
    r.partition = Partition::uniform(m, 1);
    r.measurement = "homodyne";
    r.N = bp.count();
    for (int i = 0; i < m; ++i) {
        FidelityEstimate e = protocol1(column(bp, i), targets[i], epsilon / m);
        r.fidelity_terms.push_back(e.estimate);
        r.lambda.push_back(e.lambda);
        r.bias.push_back(0);
        r.ranges.push_back(e.range);
        r.configs.push_back(e.config);
        r.epsilon_statistical += e.lambda;
        r.delta += e.delta;
    }
    r.value = combine(r.fidelity_terms);
    return r;
}

FidelityEstimate protocol3(const SampleBatch& batch, const CoreState& target, const EstimatorConfig& cfg,
                           double delta) {
    if (batch.kind != SampleKind::Heterodyne) throw ConfigError("protocol 3: heterodyne samples required");
    if (!is_zero(batch.xi)) throw ConfigError("protocol 3: balanced (or back-propagated) samples required");
    if (batch.modes != target.modes) throw ConfigError("protocol 3: batch and target mode counts differ");
    check_unit(delta, "delta");
    batch.validate();
    EstimatorConfig c = cfg;
    c.eta = batch.eta;
    c.validate(target.modes);
    double tmax = het_tau_max(target, c);
    if (!(c.tau < tmax))
        throw ConfigError("protocol 3: tau violates the convergence condition (tau < " + std::to_string(tmax) + ")");
    SampleBatch b = rescale_lossy(batch);
    FidelityEstimate e;
    e.N = b.count();
    e.config = c;
    e.bias = het_bias_bound(target, c);
    e.range = het_range_bound(target, c);
    HetEstimator g(target, c);
    shard_stats(
        e.N,
        [&](std::size_t i) {
            thread_local std::vector<cplx> a;
            a.resize(b.modes);
            for (int m = 0; m < b.modes; ++m) a[m] = b.alpha(static_cast<Eigen::Index>(i), m);
            return g(a.data());
        },
        e.estimate, e.sample_variance);
    e.delta = delta;
    e.lambda = hoeffding_lambda(e.N, delta, e.range);
    return e;
}

FidelityEstimate protocol3_modes(const SampleBatch& batch, const std::vector<int>& modes, const CoreState& target,
                                 const EstimatorConfig& cfg, double delta) {
    if (batch.kind != SampleKind::Heterodyne) throw ConfigError("protocol 3: heterodyne samples required");
    SampleBatch s = batch;
    s.modes = static_cast<int>(modes.size());
    s.alpha = CMat(batch.alpha.rows(), s.modes);
    s.xi.clear();
    for (int j = 0; j < s.modes; ++j) {
        int m = modes[j];
        if (m < 0 || m >= batch.modes) throw ConfigError("protocol 3: mode index out of range");
        s.alpha.col(j) = batch.alpha.col(m);
        if (!batch.xi.empty()) s.xi.push_back(batch.xi[m]);
    }
    return protocol3(s, target, cfg, delta);
}

WitnessReport protocol4(const SampleBatch& batch, const std::vector<CoreState>& targets,
                        const GaussianCircuit& circuit, const Partition& P, const std::vector<EstimatorConfig>& cfgs,
                        double delta) {
    if (batch.kind != SampleKind::Heterodyne) throw ConfigError("protocol 4: heterodyne samples required");
    circuit.validate();
    int m = circuit.modes();
    if (batch.modes != m) throw ConfigError("protocol 4: batch and circuit mode counts differ");
    P.validate(m);
    std::size_t nb = P.blocks.size();
    if (targets.size() != nb || cfgs.size() != nb) throw ConfigError("protocol 4: one target and config per block");
    for (std::size_t b = 0; b < nb; ++b)
        if (targets[b].modes != static_cast<int>(P.blocks[b].size()))
            throw ConfigError("protocol 4: target " + std::to_string(b + 1) + " does not match its block size");
    if (!same_xi(batch.xi, circuit.xi, m)) throw ConfigError("xi of batch and rule must match");
    if (!is_zero(circuit.xi) && batch.eta < 1.0)
        throw ConfigError("protocol 4: unbalanced heterodyne with detector loss is not supported");
    check_unit(delta, "delta");
    SampleBatch bp = backprop_heterodyne(batch, HeterodyneRule::from_circuit(circuit));
    WitnessReport r;
    r.partition = P;
    r.measurement = "heterodyne";
    r.N = bp.count();
    for (std::size_t b = 0; b < nb; ++b) {
        FidelityEstimate e = protocol3_modes(bp, P.blocks[b], targets[b], cfgs[b], delta / double(nb));
        r.fidelity_terms.push_back(e.estimate);
        r.lambda.push_back(e.lambda);
        r.bias.push_back(e.bias);
        r.ranges.push_back(e.range);
        r.configs.push_back(e.config);
        r.epsilon_statistical += e.lambda;
        r.epsilon_bias += e.bias;
        r.delta += e.delta;
    }
    r.value = combine(r.fidelity_terms);
    return r;
}

WitnessReport protocol_doped(const SampleBatch& batch, const CoreState& phi, const GaussianCircuit& circuit, int m,
                             const EstimatorConfig& block_cfg, const EstimatorConfig& vacuum_cfg, double delta) {
    int kt = phi.modes;
    if (kt >= m) throw ConfigError("doped protocol: the non-Gaussian block must be smaller than m");
    if (circuit.modes() != m) throw ConfigError("doped protocol: circuit mode count differs from m");
    Partition P;
    std::vector<int> head;
    for (int i = 0; i < kt; ++i) head.push_back(i);
    P.blocks.push_back(head);
    std::vector<CoreState> targets{phi};
    std::vector<EstimatorConfig> cfgs{block_cfg};
    for (int i = kt; i < m; ++i) {
        P.blocks.push_back({i});
        targets.push_back(vacuum_core(1));
        cfgs.push_back(vacuum_cfg);
    }
    return protocol4(batch, targets, circuit, P, cfgs, delta);
}

// ---------------- planner ----------------

namespace {

struct BlockChoice {
    bool ok = false;
    double cost = std::numeric_limits<double>::infinity();  // R^2 / lambda^2
    std::vector<int> p;
    double tau = 0, bias = 0, range = 0;
};

// R^2/(budget - bias)^2, infinite when the bias eats the budget
double block_cost(const CoreState& t, const EstimatorConfig& c, double budget, double& bias, double& range) {
    try {
        bias = het_bias_bound(t, c);
        if (!(bias < budget)) return std::numeric_limits<double>::infinity();
        range = het_range_bound(t, c);
    } catch (const ConfigError&) {
        return std::numeric_limits<double>::infinity();
    }
    double lam = budget - bias;
    double v = range * range / (lam * lam);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

BlockChoice best_tau(const CoreState& t, const std::vector<int>& p, double eta, double budget, int grid,
                     double& min_bias) {
    EstimatorConfig c{p, 0.0, eta};
    double tmax = het_tau_max(t, c);
    BlockChoice best;
    best.p = p;
    if (!(tmax > 0)) return best;
    auto eval = [&](double tau, double& bias, double& range) {
        c.tau = tau;
        double b = std::numeric_limits<double>::infinity();
        double v = block_cost(t, c, budget, b, range);
        bias = b;
        if (std::isfinite(b)) min_bias = std::min(min_bias, b);
        return v;
    };
    std::vector<double> taus(grid);
    int jbest = -1;
    for (int j = 0; j < grid; ++j) {
        // geometric: small epsilon at low p needs tau far below tmax
        taus[j] = tmax * 1e-4 * std::pow(grid / (grid + 1.0) / 1e-4, j / (grid - 1.0));
        double b = 0, r = 0;
        double v = eval(taus[j], b, r);
        if (v < best.cost) {
            best = {true, v, p, taus[j], b, r};
            jbest = j;
        }
    }
    if (jbest < 0) return best;
    // golden section between the grid neighbours
    double lo = jbest > 0 ? taus[jbest - 1] : taus[0] * 0.5;
    double hi = jbest + 1 < grid ? taus[jbest + 1] : 0.5 * (taus[grid - 1] + tmax);
    const double gr = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo), b1, r1, b2, r2;
    double f1 = eval(x1, b1, r1), f2 = eval(x2, b2, r2);
    for (int it = 0; it < 60 && hi - lo > 1e-10 * tmax; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = eval(x1, b1, r1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = eval(x2, b2, r2);
        }
    }
    double xm = f1 < f2 ? x1 : x2, bm = 0, rm = 0;
    double vm = eval(xm, bm, rm);
    if (vm < best.cost) best = {true, vm, p, xm, bm, rm};
    return best;
}

void next_p(std::vector<int>& p, int pmax, bool& done) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (++p[i] <= pmax) return;
        p[i] = 1;
    }
    done = true;
}

}  // namespace

Plan plan_samples(const std::vector<CoreState>& targets, const Partition& P, double epsilon, double delta, double eta,
                  const PlanOptions& opt) {
    check_unit(epsilon, "epsilon");
    check_unit(delta, "delta");
    if (!(eta > 0 && eta <= 1)) throw ConfigError("planner: eta must lie in (0,1]");
    int m = P.modes();
    P.validate(m);
    std::size_t nb = P.blocks.size();
    if (targets.size() != nb) throw ConfigError("planner: one target per block");
    for (std::size_t b = 0; b < nb; ++b)
        if (targets[b].modes != static_cast<int>(P.blocks[b].size()))
            throw ConfigError("planner: target " + std::to_string(b + 1) + " does not match its block size");
    if (opt.p_max < 1 || opt.fixed_p < 0 || opt.tau_grid < 3) throw ConfigError("planner: bad options");

    Plan plan;
    plan.partition = P;
    plan.eta = eta;
    double budget = epsilon / double(nb);
    double dl = delta / double(nb);
    plan.delta_i.assign(nb, dl);

    if (opt.homodyne) {
        if (eta <= 0.5) throw ConfigError("planner: homodyne estimators need eta > 1/2");
        for (const auto& blk : P.blocks)
            if (blk.size() != 1) throw ConfigError("planner: homodyne witnesses use single-mode blocks");
        std::size_t N = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            double R = homodyne_range(targets[b], eta);
            plan.range.push_back(R);
            plan.bias.push_back(0);
            plan.p.push_back({});
            plan.tau.push_back(0);
            N = std::max(N, hoeffding_samples(budget, dl, R));
        }
        plan.N = N;
    } else {
        std::vector<BlockChoice> ch(nb);
        double floor_eps = 0;
        bool feasible = true;
        for (std::size_t b = 0; b < nb; ++b) {
            int k = targets[b].modes;
            double min_bias = std::numeric_limits<double>::infinity();
            if (opt.fixed_p > 0) {
                ch[b] = best_tau(targets[b], std::vector<int>(k, opt.fixed_p), eta, budget, opt.tau_grid, min_bias);
            } else {
                std::vector<int> p(k, 1);
                bool done = false;
                while (!done) {
                    BlockChoice c = best_tau(targets[b], p, eta, budget, opt.tau_grid, min_bias);
                    if (c.ok && c.cost < ch[b].cost) ch[b] = c;
                    next_p(p, opt.p_max, done);
                }
            }
            floor_eps = std::max(floor_eps, min_bias);
            feasible = feasible && ch[b].ok && ch[b].cost * 2 * std::log(2 / dl) < 1e18;
        }
        plan.tightest_epsilon = floor_eps * double(nb);
        if (!feasible) {
            plan.feasible = false;
            plan.message = "no (p, tau) meets epsilon = " + std::to_string(epsilon) +
                           " under the convergence condition; smallest reachable bias needs epsilon > " +
                           std::to_string(plan.tightest_epsilon);
            return plan;
        }
        std::size_t N = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            plan.p.push_back(ch[b].p);
            plan.tau.push_back(ch[b].tau);
            plan.bias.push_back(ch[b].bias);
            plan.range.push_back(ch[b].range);
            N = std::max(N, hoeffding_samples(budget - ch[b].bias, dl, ch[b].range));
        }
        plan.N = N;
    }
    plan.epsilon_total = 0;
    plan.delta_total = 0;
    for (std::size_t b = 0; b < nb; ++b) {
        plan.lambda.push_back(hoeffding_lambda(plan.N, dl, plan.range[b]));
        plan.epsilon_total += plan.lambda[b] + plan.bias[b];
        plan.delta_total += plan.delta_i[b];
    }
    plan.feasible = plan.epsilon_total <= epsilon * (1 + 1e-12);
    plan.message = plan.feasible ? "ok" : "planned budgets exceed epsilon";
    return plan;
}

double Plan::recheck(const std::vector<CoreState>& targets) const {
    if (!feasible) return 0;
    if (targets.size() != partition.blocks.size()) throw ConfigError("plan recheck: one target per block");
    double worst = 0, eps = 0, del = 0;
    for (std::size_t b = 0; b < targets.size(); ++b) {
        double bias = 0, R;
        if (p[b].empty()) {
            R = homodyne_range(targets[b], eta);
        } else {
            EstimatorConfig c{p[b], tau[b], eta};
            bias = het_bias_bound(targets[b], c);
            R = het_range_bound(targets[b], c);
        }
        double lam = hoeffding_lambda(N, delta_i[b], R);
        worst = std::max({worst, std::abs(bias - this->bias[b]), std::abs(R - range[b]) / std::max(1.0, R),
                          std::abs(lam - lambda[b])});
        eps += lam + bias;
        del += delta_i[b];
    }
    return std::max({worst, std::abs(eps - epsilon_total), std::abs(del - delta_total)});
}

}  // namespace cvv
