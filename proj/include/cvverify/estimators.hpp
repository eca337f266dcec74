#pragma once
// homodyne pattern functions, heterodyne regularised estimators, bias and range bounds

#include "cvverify/fock.hpp"

namespace cvv {

struct EstimatorConfig {
    std::vector<int> p;  // per mode
    double tau = 0.3;
    double eta = 1.0;

    double t() const { return 1.0 - eta + tau * eta * eta; }
    void validate(int k) const;
};

// ---- homodyne ----
// literal formula 4x u_k v_l - 2sqrt2 sqrt(k+1) u_{k+1} v_l - 2sqrt2 sqrt(l+1) u_k v_{l+1}
double hom_f(int l, int k, double x);
// bounded member used for rho_kl: hom_f(max, min)
double hom_pattern(int k, int l, double x);
// all bounded pattern functions P_kl for k,l < C at one x
RMat hom_pattern_table(int C, double x);
// unbiased single element estimator of rho_kl
cplx hom_element(int k, int l, double x, double theta);
double hom_g(const CoreState& core, double x, double theta);

// noisy pattern function (rescaled samples), eta > 1/2
double hom_f_noisy(int k, int l, double x, double eta);

// tabulated noisy pattern functions for a core, linear interpolation on a fine grid
class NoisyHomodyneTable {
public:
    NoisyHomodyneTable(int C, double eta, double xmax = 9.0, double h = 5e-3);
    double pattern(int k, int l, double x) const;
    double g(const CoreState& core, double x, double theta) const;
    double max_abs_sum() const;  // max_x sum_{kl} |f^eta_kl|

private:
    int C_;
    double eta_, xmax_, h_;
    std::vector<RMat> tab_;  // per grid point
};

// ---- heterodyne ----
cplx het_f(int k, int l, cplx z, double tau);
cplx het_g(int m, int n, int p, cplx z, double tau);
cplx het_f_noisy(int k, int l, cplx z, double tau, double eta);
cplx het_g_noisy(int k, int l, int p, cplx z, double tau, double eta);

// G[m][n] = g^{p}_{m,n}(z) for m,n < c (noisy path when eta < 1)
CMat het_g_table(int c, int p, cplx z, double tau, double eta = 1.0);

double het_g_kmode(const CoreState& core, const std::vector<cplx>& alpha, const EstimatorConfig& cfg);

// het_g_kmode with everything that does not depend on the outcome precomputed
class HetEstimator {
public:
    HetEstimator(const CoreState& core, const EstimatorConfig& cfg);
    double operator()(const cplx* alpha) const;  // one outcome per mode
    int modes() const { return modes_; }

private:
    struct ModeTab {
        int c = 0;
        std::vector<std::vector<double>> poly;  // c*c real polynomials in |z|^2/tau, ascending
    };
    int modes_ = 0;
    double tau_ = 0, kappa_ = 0;  // E = exp(kappa |z|^2)
    std::vector<ModeTab> tabs_;
    std::vector<cplx> pair_w_;
    std::vector<int> pair_m_, pair_n_;  // flattened, modes_ per pair
};

// E^p_{m,n} (tau replaced by t for noisy configs)
double het_bias_term(int m, int n, int p, double tau_or_t);
// prod_i (1+E_i) - 1, i.e. the recursion eps(k) = eps(1)eps(k-1)+eps(1)+eps(k-1)
double het_bias_pair(const Index& m, const Index& n, const EstimatorConfig& cfg);
double het_bias_bound(const CoreState& core, const EstimatorConfig& cfg);
// closed form range (ideal); for eta < 1 a numeric sup bound is returned
double het_range_bound(const CoreState& core, const EstimatorConfig& cfg);
double het_range_numeric(const CoreState& core, const EstimatorConfig& cfg);
// largest tau allowed by the convergence condition for this core (ideal: tau, noisy: t)
double het_tau_max(const CoreState& core, const EstimatorConfig& cfg);

// homodyne range M = K_inf C^{10/3}
double hom_range_bound(const CoreState& core);
int core_size(const CoreState& core);

}  // namespace cvv
