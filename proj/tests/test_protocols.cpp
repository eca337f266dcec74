#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvverify/constants.hpp"
#include "cvverify/oracle.hpp"
#include "cvverify/protocols.hpp"

#include <cmath>
#include <cstdlib>

using namespace cvv;

namespace {

DensityOp fock_rho(const Index& n, int cut) {
    std::vector<int> c(n.size(), cut);
    return density_from_vector(fock_core(n).dense(c), c);
}

double mean_col_var(const SampleBatch& b, const CoreState& t, const EstimatorConfig& cfg) {
    double s = 0, s2 = 0;
    std::size_t n = b.count();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<cplx> a(b.alpha.cols());
        for (Eigen::Index m = 0; m < b.alpha.cols(); ++m) a[m] = b.alpha(i, m);
        double g = het_g_kmode(t, a, cfg);
        s += g;
        s2 += g * g;
    }
    return s2 / n - (s / n) * (s / n);
}

}  // namespace

TEST_CASE("hoeffding helpers") {
    double R = 3.0;
    std::size_t N = hoeffding_samples(0.1, 0.05, R);
    CHECK(hoeffding_delta(N, 0.1, R) <= 0.05);
    CHECK(hoeffding_delta(N - 1, 0.1, R) > 0.05);
    CHECK(hoeffding_lambda(N, 0.05, R) <= 0.1);
    CHECK(hoeffding_delta(1000, hoeffding_lambda(1000, 0.2, R), R) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(hoeffding_delta(100, 0.1, 1.0) == doctest::Approx(2 * std::exp(-100 * 0.01 / 2)).epsilon(1e-14));
}

TEST_CASE("protocol 1") {
    const std::size_t N = 200000;
    CoreState one = fock_core({1});
    double R = kKInf * std::pow(2.0, 10.0 / 3.0);
    double sig = R / std::sqrt(double(N));
    FidelityEstimate e = protocol1(sample_parallel_homodyne(fock_rho({1}, 3), N, 1), one, 0.1);
    CHECK(std::abs(e.estimate - 1) < 3 * sig);
    CHECK(e.range == doctest::Approx(R));
    CHECK(e.bias == 0);
    CHECK(e.N == N);
    CHECK(e.delta == doctest::Approx(hoeffding_delta(N, 0.1, R)));
    FidelityEstimate z = protocol1(sample_parallel_homodyne(fock_rho({0}, 3), N, 2), one, 0.1);
    CHECK(std::abs(z.estimate) < 3 * sig);

    CHECK_THROWS_AS(protocol1(sample_parallel_homodyne(fock_rho({1}, 3), 100, 1, ThetaPolicy::Fixed, 0.0), one, 0.1),
                    ConfigError);
    CHECK_THROWS_AS(protocol1(sample_heterodyne(fock_rho({1}, 3), 100, 1), one, 0.1), ConfigError);
    CHECK_THROWS_AS(protocol1(sample_parallel_homodyne(fock_rho({1}, 3), 100, 1, ThetaPolicy::Uniform, 0, 0.4), one, 0.1),
                    ConfigError);
}

TEST_CASE("protocol 1 with lossy detector") {
    const std::size_t N = 100000;
    SampleBatch b = sample_parallel_homodyne(fock_rho({1}, 3), N, 3, ThetaPolicy::Uniform, 0.0, 0.85);
    FidelityEstimate e = protocol1(b, fock_core({1}), 0.1);
    CHECK(std::abs(e.estimate - 1) < 4 * std::sqrt(e.sample_variance / N));
    CHECK(e.range == doctest::Approx(NoisyHomodyneTable(2, 0.85).max_abs_sum()));
}

TEST_CASE("protocol 1 is thread-count invariant") {
    SampleBatch b = sample_parallel_homodyne(oracle::random_density({3}, 4), 20000, 5);
    CoreState t = oracle::random_core({3}, 6);
    setenv("CVVERIFY_THREADS", "1", 1);
    double a = protocol1(b, t, 0.1).estimate;
    setenv("CVVERIFY_THREADS", "3", 1);
    double c = protocol1(b, t, 0.1).estimate;
    unsetenv("CVVERIFY_THREADS");
    CHECK(a == c);
}

TEST_CASE("protocol 2") {
    const std::size_t N = 100000;
    HomodyneRule id(RMat::Identity(3, 3), {0.0, 0.0, 0.0});
    std::vector<CoreState> vac(3, vacuum_core(1));
    WitnessReport r = protocol2(sample_parallel_homodyne(fock_rho({0, 0, 0}, 2), N, 7), vac, id, 0.3);
    double R = kKInf;
    CHECK(std::abs(r.value - 1) < 3 * 3 * R / std::sqrt(double(N)));
    CHECK(r.fidelity_terms.size() == 3);
    CHECK(r.measurement == "homodyne");
    double w1 = 1;
    for (double f : r.fidelity_terms) w1 -= 1 - f;
    CHECK(r.value == w1);

    // loss on mode 1 only, through an orthogonal circuit with displacement
    DensityOp rho = loss_channel(fock_rho({1, 0}, 2), {0.8, 1.0});
    GaussianCircuit c = GaussianCircuit::identity(2);
    c.U = random_orthogonal(2, 3).cast<cplx>();
    c.beta = {cplx(0.2, -0.1), cplx(0.0, 0.15)};
    DensityOp out = apply_circuit(rho, c, std::vector<int>{14, 14});
    CoreState target = fock_core({1, 0});
    double exact = exact_witness(rho, target, Partition::uniform(2, 1));
    CHECK(exact == doctest::Approx(0.8));
    WitnessReport w = protocol2(sample_parallel_homodyne(out, N, 8), {fock_core({1}), vacuum_core(1)},
                                HomodyneRule::from_circuit(c), 0.2);
    double R1 = kKInf * std::pow(2.0, 10.0 / 3.0);
    CHECK(std::abs(w.value - exact) < 3 * (R1 + kKInf) / std::sqrt(double(N)));
    CHECK(w.epsilon_statistical == doctest::Approx(0.2));
}

TEST_CASE("protocol 3") {
    const std::size_t N = 100000;
    EstimatorConfig cfg{{1, 1}, 0.3, 1.0};
    CoreState vv = vacuum_core(2);
    FidelityEstimate e = protocol3(sample_heterodyne(fock_rho({0, 0}, 2), N, 1), vv, cfg, 0.05);
    CHECK(std::abs(e.estimate - 1) <= e.epsilon());
    CHECK(e.bias == doctest::Approx(het_bias_bound(vv, cfg)));
    CHECK(e.range == doctest::Approx(het_range_bound(vv, cfg)));
    CHECK(e.lambda == doctest::Approx(hoeffding_lambda(N, 0.05, e.range)));
    FidelityEstimate z = protocol3(sample_heterodyne(fock_rho({1, 1}, 2), N, 2), vv, cfg, 0.05);
    CHECK(std::abs(z.estimate) <= z.epsilon());

    SampleBatch b = sample_heterodyne(fock_rho({0, 0}, 2), 1000, 3);
    CHECK_THROWS_AS(protocol3(b, vv, EstimatorConfig{{1, 1}, 1.2, 1.0}, 0.05), ConfigError);
    CHECK_THROWS_AS(protocol3(b, fock_core({1, 0}), EstimatorConfig{{1, 1}, 0.6, 1.0}, 0.05), ConfigError);
    CHECK_THROWS_AS(protocol3(b, vacuum_core(3), EstimatorConfig{{1, 1, 1}, 0.3, 1.0}, 0.05), ConfigError);
    SampleBatch u = sample_heterodyne(fock_rho({0, 0}, 2), 1000, 3, {cplx(0.1), cplx(0)});
    CHECK_THROWS_AS(protocol3(u, vv, cfg, 0.05), ConfigError);
}

TEST_CASE("protocol 3 subset of modes") {
    SampleBatch b = sample_heterodyne(fock_rho({0, 1, 0}, 2), 20000, 4);
    EstimatorConfig cfg{{1, 1}, 0.3, 1.0};
    FidelityEstimate a = protocol3_modes(b, {0, 2}, vacuum_core(2), cfg, 0.1);
    CHECK(std::abs(a.estimate - 1) <= a.epsilon());
    CHECK_THROWS_AS(protocol3_modes(b, {0, 3}, vacuum_core(2), cfg, 0.1), ConfigError);
}

TEST_CASE("heterodyne variance grows with k") {
    const std::size_t N = 100000;
    EstimatorConfig c1{{1}, 0.3, 1.0}, c2{{1, 1}, 0.3, 1.0};
    double v1 = mean_col_var(sample_heterodyne(fock_rho({0}, 2), N, 9), vacuum_core(1), c1);
    double v2 = mean_col_var(sample_heterodyne(fock_rho({0, 0}, 2), N, 10), vacuum_core(2), c2);
    CHECK(v2 / (v1 * v1) >= 0.1);
    CHECK(v2 / (v1 * v1) <= 10);
    CHECK(v2 > v1);
}

TEST_CASE("protocol 4 with identity circuit is blockwise protocol 3") {
    SampleBatch b = sample_heterodyne(oracle::random_density({2, 2, 2, 2}, 13, 2), 20000, 11);
    Partition P = Partition::uniform(4, 2);
    std::vector<CoreState> t{vacuum_core(2), fock_core({1, 0})};
    std::vector<EstimatorConfig> cfgs{{{1, 1}, 0.3, 1.0}, {{2, 1}, 0.25, 1.0}};
    WitnessReport w = protocol4(b, t, GaussianCircuit::identity(4), P, cfgs, 0.1);
    FidelityEstimate f0 = protocol3_modes(b, {0, 1}, t[0], cfgs[0], 0.05);
    FidelityEstimate f1 = protocol3_modes(b, {2, 3}, t[1], cfgs[1], 0.05);
    CHECK(w.fidelity_terms[0] == doctest::Approx(f0.estimate).epsilon(1e-14));
    CHECK(w.fidelity_terms[1] == doctest::Approx(f1.estimate).epsilon(1e-14));
    CHECK(w.value == doctest::Approx(1 - (1 - f0.estimate) - (1 - f1.estimate)).epsilon(1e-14));
    CHECK(w.delta == doctest::Approx(0.1));
    CHECK(w.epsilon() == doctest::Approx(f0.epsilon() + f1.epsilon()));
    CHECK(w.measurement == "heterodyne");
    CHECK_THROWS_AS(protocol4(b, t, GaussianCircuit::identity(4), P, {cfgs[0]}, 0.1), ConfigError);
}

TEST_CASE("protocol 4 through a circuit") {
    const std::size_t N = 100000;
    CoreState core = fock_core({1, 0, 1, 0});
    GaussianCircuit c = GaussianCircuit::identity(4);
    c.U = random_near_identity(4, 0.4, 5);
    c.beta = {cplx(0.1, 0), cplx(0), cplx(0), cplx(0, -0.1)};
    DensityOp rho = loss_channel(density_from_pure(core), std::vector<double>(4, 0.95));
    DensityOp out = apply_circuit(rho, c);
    Partition P = Partition::uniform(4, 2);
    double exact = exact_witness(rho, core, P);
    std::vector<EstimatorConfig> cfgs(2, EstimatorConfig{{1, 1}, 0.3, 1.0});
    WitnessReport w = protocol4(sample_heterodyne(out, N, 12), {fock_core({1, 0}), fock_core({1, 0})}, c, P, cfgs, 0.1);
    CHECK(std::abs(w.value - exact) <= w.epsilon());

    // unbalanced batch must match the circuit
    GaussianCircuit s = GaussianCircuit::identity(2);
    s.xi = {cplx(0.2), cplx(0)};
    SampleBatch ub = sample_heterodyne(fock_rho({0, 0}, 2), 1000, 1, s.xi);
    std::vector<EstimatorConfig> c1(2, EstimatorConfig{{1}, 0.3, 1.0});
    CHECK_NOTHROW(protocol4(ub, {vacuum_core(1), vacuum_core(1)}, s, Partition::uniform(2, 1), c1, 0.1));
    CHECK_THROWS_AS(protocol4(ub, {vacuum_core(1), vacuum_core(1)}, GaussianCircuit::identity(2),
                              Partition::uniform(2, 1), c1, 0.1),
                    ConfigError);
    SampleBatch lossy_ub = sample_heterodyne(fock_rho({0, 0}, 2), 1000, 1, s.xi, 0.9);
    CHECK_THROWS_AS(protocol4(lossy_ub, {vacuum_core(1), vacuum_core(1)}, s, Partition::uniform(2, 1), c1, 0.1),
                    ConfigError);
}

TEST_CASE("doped protocol") {
    const std::size_t N = 100000;
    CoreState phi = make_core_state(AmplitudeMap{{{0, 0}, 1.0}, {{1, 1}, 1.0}});
    CoreState full = tensor(phi, vacuum_core(2));
    std::vector<int> cut{2, 2, 2, 2};
    DensityOp rho = density_from_vector(full.dense(cut), cut);
    EstimatorConfig bc{{1, 1}, 0.3, 1.0}, vc{{1}, 0.3, 1.0};
    WitnessReport w = protocol_doped(sample_heterodyne(rho, N, 3), phi, GaussianCircuit::identity(4), 4, bc, vc, 0.1);
    CHECK(std::abs(w.value - 1) <= w.epsilon());
    CHECK(w.fidelity_terms.size() == 3);
    CHECK(w.partition.str() == "1,2|3|4");
    CHECK_THROWS_AS(protocol_doped(sample_heterodyne(rho, 100, 3), full, GaussianCircuit::identity(4), 4, bc, vc, 0.1),
                    ConfigError);
}

TEST_CASE("planner basics") {
    std::vector<CoreState> t{vacuum_core(1)};
    Plan p = plan_samples(t, Partition::uniform(1, 1), 0.1, 0.05);
    REQUIRE(p.feasible);
    CHECK(p.epsilon_total <= 0.1 + 1e-12);
    CHECK(p.delta_total == doctest::Approx(0.05));
    CHECK(p.recheck(t) < 1e-12);
    Plan h = plan_samples(t, Partition::uniform(1, 1), 0.1, 0.025);
    CHECK(double(h.N) / double(p.N) <= 1.3);
    CHECK(h.N > p.N);

    std::vector<CoreState> t2{vacuum_core(2)};
    Plan p2 = plan_samples(t2, Partition::uniform(2, 2), 0.1, 0.05);
    REQUIRE(p2.feasible);
    CHECK(p2.N > p.N);
    CHECK(p2.recheck(t2) < 1e-12);

    CHECK_THROWS_AS(plan_samples(t, Partition::uniform(1, 1), 0.0, 0.05), ConfigError);
    CHECK_THROWS_AS(plan_samples(t, Partition::uniform(1, 1), 0.1, 1.0), ConfigError);
    CHECK_THROWS_AS(plan_samples(t2, Partition::uniform(2, 1), 0.1, 0.05), ConfigError);
}

TEST_CASE("planner on several blocks") {
    std::vector<CoreState> t{fock_core({1, 0}), vacuum_core(2)};
    Plan p = plan_samples(t, Partition::uniform(4, 2), 0.2, 0.1);
    REQUIRE(p.feasible);
    CHECK(p.p.size() == 2);
    CHECK(p.p[0].size() == 2);
    CHECK(p.epsilon_total <= 0.2 + 1e-12);
    CHECK(p.recheck(t) < 1e-12);
    for (std::size_t b = 0; b < 2; ++b) CHECK(p.tau[b] <= het_tau_max(t[b], EstimatorConfig{p.p[b], p.tau[b], 1.0}));
}

TEST_CASE("planner scaling in epsilon") {
    std::vector<CoreState> t{vacuum_core(1)};
    for (int pf : {1, 2, 3}) {
        PlanOptions o;
        o.fixed_p = pf;
        std::vector<double> le, ln;
        for (double e : {0.1, 0.05, 0.025}) {
            Plan p = plan_samples(t, Partition::uniform(1, 1), e, 0.05, 1.0, o);
            REQUIRE(p.feasible);
            le.push_back(std::log(e));
            ln.push_back(std::log(double(p.N)));
        }
        double mx = (le[0] + le[1] + le[2]) / 3, my = (ln[0] + ln[1] + ln[2]) / 3, sxy = 0, sxx = 0;
        for (int i = 0; i < 3; ++i) {
            sxy += (le[i] - mx) * (ln[i] - my);
            sxx += (le[i] - mx) * (le[i] - mx);
        }
        double slope = -sxy / sxx;
        CHECK(slope <= 2 + 2.0 / pf + 0.3);
        CHECK(slope >= 2);
    }
}

TEST_CASE("planner homodyne and infeasible cases") {
    std::vector<CoreState> t{fock_core({1}), vacuum_core(1)};
    PlanOptions o;
    o.homodyne = true;
    Plan h = plan_samples(t, Partition::uniform(2, 1), 0.2, 0.1, 1.0, o);
    REQUIRE(h.feasible);
    CHECK(h.bias[0] == 0);
    CHECK(h.range[0] == doctest::Approx(kKInf * std::pow(2.0, 10.0 / 3.0)));
    CHECK(h.N == hoeffding_samples(0.1, 0.05, h.range[0]));
    CHECK(h.recheck(t) < 1e-12);
    CHECK_THROWS_AS(plan_samples(t, Partition::uniform(2, 1), 0.2, 0.1, 0.4, o), ConfigError);
    CHECK_THROWS_AS(plan_samples({vacuum_core(2)}, Partition::uniform(2, 2), 0.2, 0.1, 1.0, o), ConfigError);

    // strong loss leaves a bias floor
    Plan bad = plan_samples({vacuum_core(1)}, Partition::uniform(1, 1), 0.01, 0.1, 0.3);
    CHECK(!bad.feasible);
    CHECK(bad.tightest_epsilon > 0.01);
    CHECK(!bad.message.empty());
    Plan ok = plan_samples({vacuum_core(1)}, Partition::uniform(1, 1), 0.3, 0.1, 0.8);
    CHECK(ok.feasible);
    CHECK(ok.recheck({vacuum_core(1)}) < 1e-12);
}
