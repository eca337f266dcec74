#pragma once
// brute-force references: quadrature expectations, index-loop partial traces, sweep reports.
// deliberately written without the fast paths of fock/measure/estimators.

#include "cvverify/fock.hpp"
#include "cvverify/witness.hpp"

#include <functional>
#include <string>

namespace cvv::oracle {

struct QuadratureGrid {
    int panels = 6;       // Gauss-Legendre panels on [0,radius] (homodyne: twice as many on [-radius,radius])
    int order = 16;       // nodes per panel
    int angular = 32;     // uniform nodes in phase / theta
    double radius = 9.0;  // heterodyne: |alpha| domain; homodyne: |x| domain
    double tol = 1e-8;    // doubling must move the result by less than this
    bool certify = true;
    QuadratureGrid doubled() const;
};

using HetFn = std::function<cplx(const std::vector<cplx>&)>;
using HomFn = std::function<cplx(double, double)>;   // (x, theta)

// single mode building blocks, computed from explicit sums
cplx coherent_amplitude(int n, cplx alpha);        // <n|alpha>
double hermite_poly_function(int n, double x);     // u_n from the explicit Hermite sum
double q_brute(const DensityOp& rho, const std::vector<cplx>& alpha);
double homodyne_pdf_brute(const DensityOp& rho, double x, double theta);  // single mode
// single mode s-parametrised quasi-probability, finite sum form
double w_function(const DensityOp& rho, cplx alpha, double s);

cplx exact_expectation_heterodyne(const DensityOp& rho, const HetFn& g, const QuadratureGrid& grid = {});
// E over W_rho(., s) for a single mode (s < -1 smoothed Q)
cplx exact_expectation_w(const DensityOp& rho, const std::function<cplx(cplx)>& g, double s,
                         const QuadratureGrid& grid = {});

// sum over terms of coef * prod_i g_i(alpha_i): per-mode 2D integrals contracted with rho
struct ProductTerm {
    cplx coef;
    std::vector<std::function<cplx(cplx)>> factors;
};
cplx exact_expectation_heterodyne_separable(const DensityOp& rho, const std::vector<ProductTerm>& terms,
                                            const QuadratureGrid& grid = {});

cplx exact_expectation_homodyne(const DensityOp& rho, const HomFn& g, const QuadratureGrid& grid = {});
// rescaled lossy homodyne distribution, built by explicit convolution of the ideal pdf
cplx exact_expectation_homodyne_noisy(const DensityOp& rho, const HomFn& g, double eta,
                                      const QuadratureGrid& grid = {});
double noisy_pdf_by_convolution(const DensityOp& rho, double x, double theta, double eta);

DensityOp brute_partial_trace(const DensityOp& rho, const std::vector<int>& keep);
double brute_fidelity(const DensityOp& rho, const CoreState& psi);
double brute_witness(const DensityOp& rho, const std::vector<CoreState>& factors, const Partition& P);

// random objects used by the sweeps
DensityOp random_density(const std::vector<int>& cutoffs, std::uint64_t seed, int rank = 0);
CoreState random_core(const std::vector<int>& cutoffs, std::uint64_t seed);

struct SweepRow {
    std::string name;
    int trials = 0;
    int violations = 0;
    double worst_slack = 0;  // most negative slack seen (>= 0 means fine)
    bool expect_clean = true;
    std::string note;
};
struct Report {
    std::vector<SweepRow> rows;
    std::string table() const;
    std::string json() const;
    bool all_clean() const;
};

struct ReportOptions {
    int bias_states = 50;
    int sandwich_states = 100;
    int range_cores = 20;
    std::size_t range_points = 100000;
    std::uint64_t seed = 11;
};
Report empirical_vs_bound_report(const ReportOptions& opt = {});

}  // namespace cvv::oracle
