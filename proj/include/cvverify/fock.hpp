#pragma once
// truncated Fock space: pure core states, density operators, partial trace, fidelity

#include "cvverify/common.hpp"

#include <map>
#include <utility>

namespace cvv {

struct CoreState {
    int modes = 0;
    std::vector<int> cutoffs;                       // 1 + max index per mode
    std::vector<std::pair<Index, cplx>> coeffs;     // sorted by index, nonzero only

    cplx amplitude(const Index& idx) const;
    // dense amplitude vector in the given (larger or equal) cutoffs; entries outside are dropped
    CVec dense(const std::vector<int>& cut) const;
    CVec dense() const { return dense(cutoffs); }
    double norm2() const;
    int max_photons() const;   // C - 1 in the homodyne range formula
};

using AmplitudeMap = std::map<Index, cplx>;

CoreState make_core_state(const AmplitudeMap& coeffs);
// single mode convenience: amplitudes of |0>,|1>,...
CoreState make_core_state(const std::vector<cplx>& amps);
CoreState core_from_vector(const CVec& v, const std::vector<int>& cutoffs, double drop_tol = 0.0);
CoreState vacuum_core(int modes);
CoreState fock_core(const Index& n);
CoreState tensor(const CoreState& a, const CoreState& b);

struct DensityOp {
    int modes = 0;
    std::vector<int> cutoffs;
    CMat matrix;
    double truncation_leak = 0.0;

    std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
    double trace() const { return matrix.trace().real(); }
    cplx element(const Index& row, const Index& col) const;
    // Hermitian + trace checks; psd only on request
    void validate(bool check_psd = false, double truncation_tol = 1e-6) const;
    double min_eigenvalue() const;
};

DensityOp density_from_pure(const CoreState& psi);
DensityOp density_from_vector(const CVec& v, const std::vector<int>& cutoffs);
DensityOp make_density(const CMat& m, const std::vector<int>& cutoffs);
// zero-pad (or crop, recording the lost trace in the leak) into new cutoffs
DensityOp embed(const DensityOp& rho, const std::vector<int>& cutoffs);
DensityOp tensor(const DensityOp& a, const DensityOp& b);

// keep: 0-based, ordered, duplicate free
DensityOp partial_trace(const DensityOp& rho, const std::vector<int>& keep);

double fidelity_pure(const DensityOp& rho, const CoreState& psi);
std::pair<double, double> trace_distance_bounds(double F);

// apply a single-mode operator (cutoffs[mode] x cutoffs[mode]) on one mode: returns op * rho * op^dagger
DensityOp apply_local(const DensityOp& rho, int mode, const CMat& op);
// mean photon number of one mode
double mean_photons(const DensityOp& rho, int mode);

}  // namespace cvv
