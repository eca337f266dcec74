#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvverify/experiments.hpp"
#include "cvverify/io.hpp"
#include "cvverify/oracle.hpp"

#include <cmath>

using namespace cvv;
using io::json;

TEST_CASE("core state json round trip") {
    AmplitudeMap m{{{0, 1}, cplx(0.6, 0.0)}, {{2, 0}, cplx(0.0, 0.8)}};
    CoreState s = make_core_state(m);
    CoreState r = io::core_from_json(json::parse(io::to_json(s).dump()));
    CHECK(r.modes == s.modes);
    CHECK(r.cutoffs == s.cutoffs);
    REQUIRE(r.coeffs.size() == s.coeffs.size());
    for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
        CHECK(r.coeffs[i].first == s.coeffs[i].first);
        CHECK(r.coeffs[i].second == s.coeffs[i].second);
    }
    // third of a norm: 1/sqrt(3) is not exactly representable
    std::vector<cplx> a(3, 1.0 / std::sqrt(3.0));
    CoreState t = make_core_state(a);
    CoreState t2 = io::core_from_json(io::to_json(t));
    for (std::size_t i = 0; i < 3; ++i) CHECK(t2.coeffs[i].second == t.coeffs[i].second);

    CoreState f = io::core_from_json(json{{"fock", {1, 0, 1, 0}}});
    CHECK(f.coeffs.size() == 1);
    CHECK(f.amplitude({1, 0, 1, 0}) == cplx(1.0));
}

TEST_CASE("core state json errors") {
    CHECK_THROWS_AS(io::core_from_json(json{{"modes", 1}}), ConfigError);
    CHECK_THROWS_AS(io::core_from_json(json::parse(R"({"modes":2,"entries":[[0,1.0,0.0]]})")), ConfigError);
    CHECK_THROWS_AS(io::core_from_json(json::parse(R"({"modes":1,"entries":[[0,0.0,0.0]]})")), ConfigError);
    CHECK_THROWS_AS(io::core_from_json(json::parse(R"({"modes":1,"cutoffs":[1],"entries":[[2,1.0,0.0]]})")),
                    ConfigError);
}

TEST_CASE("density json round trip") {
    DensityOp r = oracle::random_density({2, 3}, 5);
    DensityOp q = io::density_from_json(json::parse(io::to_json(r).dump()));
    CHECK(q.cutoffs == r.cutoffs);
    CHECK(q.matrix == r.matrix);
    CHECK_THROWS_AS(io::density_from_json(json::parse(R"({"modes":1,"cutoffs":[2],"entries":[[0,1,1.0,0.0]]})")),
                    ConfigError);
}

TEST_CASE("circuit json") {
    GaussianCircuit c = GaussianCircuit::identity(3);
    c.U = random_passive(3, 4);
    c.beta = {cplx(0.1, -0.2), 0.0, cplx(0, 1)};
    c.xi = {0.0, cplx(0.05, 0.01), 0.0};
    c.eta = {0.9, 1.0, 0.8};
    GaussianCircuit d = io::circuit_from_json(json::parse(io::to_json(c).dump()));
    CHECK(d.U == c.U);
    CHECK(d.beta == c.beta);
    CHECK(d.xi == c.xi);
    CHECK(d.eta == c.eta);

    GaussianCircuit e = io::circuit_from_json(json::parse(R"({"eta":0.7})"), 2);
    CHECK(e.modes() == 2);
    CHECK(e.eta == std::vector<double>{0.7, 0.7});
    CHECK_THROWS_AS(io::circuit_from_json(json::parse(R"({"U":[[1,1],[0,1]]})")), ConfigError);
    CHECK_THROWS_AS(io::circuit_from_json(json::parse(R"({})")), ConfigError);
}

TEST_CASE("sample csv round trip is exact") {
    DensityOp r = oracle::random_density({2, 2}, 8);
    SampleBatch h = sample_parallel_homodyne(r, 300, 3);
    SampleBatch h2 = io::batch_from_csv(io::batch_to_csv(h));
    CHECK(h2.kind == SampleKind::Homodyne);
    CHECK(h2.x == h.x);
    CHECK(h2.theta == h.theta);
    CHECK(h2.seed == h.seed);
    CHECK(io::batch_to_csv(h2) == io::batch_to_csv(h));

    SampleBatch g = sample_heterodyne(r, 300, 4, {cplx(0.1, 0), cplx(0, 0.2)}, 0.8);
    SampleBatch g2 = io::batch_from_csv(io::batch_to_csv(g));
    CHECK(g2.kind == SampleKind::Heterodyne);
    CHECK(g2.alpha == g.alpha);
    CHECK(g2.eta == g.eta);
    CHECK(g2.xi == g.xi);
    CHECK(io::batch_to_csv(g2) == io::batch_to_csv(g));
}

TEST_CASE("sample csv errors") {
    CHECK_THROWS_AS(io::batch_from_csv("1,2,3\n"), ConfigError);
    CHECK_THROWS_AS(io::batch_from_csv("shot,theta,x1\n0,0.1\n"), ConfigError);
    CHECK_THROWS_AS(io::batch_from_csv("shot,theta,x1\n0,0.1,abc\n"), ConfigError);
    CHECK_THROWS_AS(io::batch_from_csv("shot,theta,x1\n0,7.0,1.0\n"), ConfigError);
    CHECK_THROWS_AS(io::batch_from_csv(""), ConfigError);
    SampleBatch b = io::batch_from_csv("shot,re1,im1\n0,1.5,-2\n");
    CHECK(b.alpha(0, 0) == cplx(1.5, -2));
}

TEST_CASE("report json carries its own value") {
    WitnessReport w;
    w.partition = Partition::parse("1,2|3,4", 4);
    w.fidelity_terms = {0.9, 0.85};
    w.value = witness_from_fidelities(w.fidelity_terms, w.partition);
    w.lambda = {0.01, 0.01};
    w.bias = {0.001, 0.002};
    w.epsilon_statistical = 0.02;
    w.epsilon_bias = 0.003;
    json j = io::to_json(w);
    double v = 1;
    for (const auto& f : j["fidelity_terms"]) v -= 1 - f.get<double>();
    CHECK(j["value"].get<double>() == doctest::Approx(v).epsilon(1e-15));
    CHECK(j["partition"] == json::parse("[[1,2],[3,4]]"));
    CHECK(j["epsilon"]["total"].get<double>() == doctest::Approx(0.023));
}

TEST_CASE("curves csv and svg") {
    Curves c;
    c.title = "t <x>";
    c.grid = {0, 0.5, 1};
    c.names = {"A", "B"};
    c.cols = {{-1, 0, 1}, {0.25, 0.5, 1}};
    std::string csv = curves_csv(c);
    CHECK(csv == "eta,A,B\n0,-1,0.25\n0.5,0,0.5\n1,1,1\n");
    std::string svg = curves_svg(c);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("t &lt;x&gt;") != std::string::npos);
    CHECK(zero_crossing(c.grid, c.cols[0]) == doctest::Approx(0.5));
    CHECK(zero_crossing({0, 1}, {-1, 1}) == doctest::Approx(0.5));
    CHECK(std::isnan(zero_crossing({0, 1}, {-1, -0.5})));
}

TEST_CASE("experiments: trivial endpoints and determinism") {
    ExperimentConfig cfg;
    cfg.eta_grid = {1.0};
    for (const char* id : {"example2", "example3"}) {
        cfg.id = id;
        Curves c = run_experiment(cfg);
        for (const auto& col : c.cols) CHECK(col[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    cfg.id = "example1";
    cfg.eps_v = 0;
    cfg.family = 2;
    Curves c1 = run_experiment(cfg);
    for (const auto& col : c1.cols) CHECK(col[0] == doctest::Approx(1.0).epsilon(1e-12));

    ExperimentConfig d;
    d.id = "example1";
    d.family = 4;
    CHECK(curves_csv(run_experiment(d)) == curves_csv(run_experiment(d)));
    d.cutoff = 2;
    CHECK_THROWS_AS(run_experiment(d), NumericalError);
    d.cutoff = 1;
    CHECK_THROWS_AS(run_experiment(d), ConfigError);
    d.id = "bogus";
    CHECK_THROWS_AS(run_experiment(d), ConfigError);
}

TEST_CASE("example 2 correlated witness against a direct two-block computation") {
    ExperimentConfig cfg;
    cfg.id = "example2";
    Curves c = run_experiment(cfg);
    for (std::size_t g = 0; g < c.grid.size(); ++g) {
        // each pair holds |10> -> sqrt(t)|10> + sqrt(1-t)|01>, so the pair fidelity is t
        double t = c.grid[g];
        double W = 1 - 2 * (1 - t);
        CHECK(std::abs(c.col("W2_12_34")[g] - W) < 1e-12);
        CHECK(std::abs(c.col("F")[g] - t * t) < 1e-12);
    }
}
