#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvverify/fock.hpp"
#include "cvverify/gaussian.hpp"
#include "cvverify/oracle.hpp"

#include <cmath>

using namespace cvv;

TEST_CASE("make_core_state normalises and infers cutoffs") {
    CoreState vac = make_core_state(AmplitudeMap{{{0, 0, 0}, 1.0}});
    CHECK(vac.modes == 3);
    CHECK(vac.cutoffs == std::vector<int>{1, 1, 1});

    CoreState plus = make_core_state(std::vector<cplx>{1.0, 1.0});
    CHECK(std::abs(plus.norm2() - 1) < 1e-12);
    CHECK(std::abs(plus.amplitude({0}) - 1 / std::sqrt(2.0)) < 1e-15);

    CoreState ft = make_core_state(std::vector<cplx>{3.0, 4.0});
    CHECK(std::abs(ft.amplitude({0}) - 0.6) < 1e-15);
    CHECK(std::abs(ft.amplitude({1}) - 0.8) < 1e-15);

    CHECK_THROWS_AS(make_core_state(AmplitudeMap{{{0}, 0.0}}), ConfigError);
}

TEST_CASE("density_from_pure") {
    DensityOp v = density_from_pure(vacuum_core(2));
    CHECK(v.dim() == 1);
    CHECK(std::abs(v.matrix(0, 0) - 1.0) < 1e-15);
    DensityOp p = density_from_pure(make_core_state(std::vector<cplx>{1.0, 1.0}));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(p.matrix(i, j) - 0.5) < 1e-15);
    for (int s = 0; s < 20; ++s) {
        DensityOp r = density_from_pure(oracle::random_core({3, 2}, s));
        CHECK(std::abs((r.matrix * r.matrix).trace().real() - 1) < 1e-12);
    }
}

TEST_CASE("partial_trace examples and composition") {
    DensityOp z = density_from_pure(fock_core({0, 0}));
    DensityOp r = partial_trace(z, {0});
    CHECK(r.dim() == 1);
    CHECK(std::abs(r.matrix(0, 0) - 1.0) < 1e-15);

    CoreState bell = make_core_state(AmplitudeMap{{{0, 0}, 1.0}, {{1, 1}, 1.0}});
    DensityOp b = partial_trace(density_from_pure(bell), {0});
    DensityOp bb = oracle::brute_partial_trace(density_from_pure(bell), {0});
    CHECK((b.matrix - bb.matrix).norm() < 1e-14);
    CHECK(std::abs(b.matrix(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(b.matrix(1, 1) - 0.5) < 1e-15);
    CHECK(std::abs(b.matrix(0, 1)) < 1e-15);

    DensityOp rho = oracle::random_density({2, 3, 2}, 5);
    CHECK((partial_trace(rho, {0, 1, 2}).matrix - rho.matrix).norm() < 1e-15);
    // trace out mode 2 then mode 1 == keep {0}
    DensityOp a = partial_trace(partial_trace(rho, {0, 1}), {0});
    DensityOp c = partial_trace(rho, {0});
    CHECK((a.matrix - c.matrix).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(c.trace() - 1) < 1e-12);
    // reordering keeps match the brute oracle
    DensityOp d = partial_trace(rho, {2, 0});
    DensityOp e = oracle::brute_partial_trace(rho, {2, 0});
    CHECK((d.matrix - e.matrix).cwiseAbs().maxCoeff() < 1e-14);

    CHECK_THROWS_AS(partial_trace(rho, {0, 0}), ConfigError);
    CHECK_THROWS_AS(partial_trace(rho, {3}), ConfigError);
    CHECK_THROWS_AS(partial_trace(rho, {}), ConfigError);
}

TEST_CASE("fidelity_pure") {
    DensityOp v = density_from_pure(fock_core({0}));
    CHECK(fidelity_pure(v, fock_core({0})) == doctest::Approx(1.0));
    CHECK(fidelity_pure(embed(v, {2}), fock_core({1})) == doctest::Approx(0.0));
    // coherent alpha=1, cutoff 20, overlap with vacuum = e^{-1}
    CVec coh(20);
    for (int n = 0; n < 20; ++n) coh(n) = oracle::coherent_amplitude(n, 1.0);
    DensityOp c = density_from_vector(coh, {20});
    CHECK(std::abs(fidelity_pure(c, fock_core({0})) - std::exp(-1.0)) < 1e-8);
    CHECK_THROWS_AS(fidelity_pure(c, fock_core({0, 0})), ConfigError);

    for (int s = 0; s < 100; ++s) {
        CoreState psi = oracle::random_core({3, 2}, 100 + s);
        CHECK(std::abs(fidelity_pure(density_from_pure(psi), psi) - 1) < 1e-12);
    }
    for (int s = 0; s < 20; ++s) {
        DensityOp r = oracle::random_density({3, 3}, 300 + s);
        CoreState psi = oracle::random_core({3, 3}, 400 + s);
        double f = fidelity_pure(r, psi);
        CHECK(f >= 0);
        CHECK(f <= 1);
        CHECK(std::abs(f - oracle::brute_fidelity(r, psi)) < 1e-13);
    }
}

TEST_CASE("fidelity monotone under partial trace for product targets") {
    for (int s = 0; s < 30; ++s) {
        DensityOp r = oracle::random_density({2, 2, 2}, 700 + s, 2);
        CoreState a = oracle::random_core({2}, 800 + s), b = oracle::random_core({2}, 900 + s),
                  c = oracle::random_core({2}, 1000 + s);
        CoreState all = tensor(tensor(a, b), c);
        double F = fidelity_pure(r, all);
        CHECK(F <= fidelity_pure(partial_trace(r, {0, 1}), tensor(a, b)) + 1e-10);
        CHECK(F <= fidelity_pure(partial_trace(r, {2}), c) + 1e-10);
    }
}

TEST_CASE("trace_distance_bounds") {
    auto [l1, u1] = trace_distance_bounds(1.0);
    CHECK(l1 == doctest::Approx(0.0));
    CHECK(u1 == doctest::Approx(0.0));
    auto [l0, u0] = trace_distance_bounds(0.0);
    CHECK(l0 == doctest::Approx(1.0));
    CHECK(u0 == doctest::Approx(1.0));
    auto [l, u] = trace_distance_bounds(0.75);
    CHECK(std::abs(l - 0.133975) < 1e-6);
    CHECK(std::abs(u - 0.5) < 1e-6);
    CHECK_THROWS_AS(trace_distance_bounds(1.1), ConfigError);
    for (double F = 0; F <= 1; F += 0.01) {
        auto [a, b] = trace_distance_bounds(F);
        CHECK(a <= b + 1e-15);
    }
}

TEST_CASE("density validation") {
    DensityOp r = oracle::random_density({3}, 1);
    CHECK_NOTHROW(r.validate(true));
    DensityOp bad = r;
    bad.matrix(0, 1) += 0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    DensityOp neg = r;
    neg.matrix = CMat::Zero(3, 3);
    neg.matrix(0, 0) = 1.5;
    neg.matrix(1, 1) = -0.5;
    CHECK_THROWS_AS(neg.validate(true), ConfigError);
}
