#pragma once
// Gaussian elements: D(alpha), S(xi), passive lifts, loss, circuits V = S(xi) D(beta) U

#include "cvverify/fock.hpp"

#include <cstdint>

namespace cvv {

struct GaussianCircuit {
    std::vector<cplx> beta;
    std::vector<cplx> xi;
    CMat U;
    std::vector<double> eta;

    int modes() const { return static_cast<int>(beta.size()); }
    void validate() const;
    static GaussianCircuit identity(int m);
};

struct OrthogonalSymplectic {
    RMat block;  // (S_O)_1
    explicit OrthogonalSymplectic(const RMat& b);
};

// pad used internally before cropping (cutoff guidance: cutoff >= 8|alpha|^2 + 10)
int displacement_pad(cplx alpha);
int squeezing_pad(cplx xi);

CMat displacement_op(cplx alpha, int cutoff);
CMat squeezing_op(cplx xi, int cutoff);

cplx permanent(const CMat& A);  // Ryser

// Fock-space matrix of the interferometer, ordered like DensityOp
CMat passive_fock_lift(const CMat& U, const std::vector<int>& cutoffs);

// basis of the N-photon sector over m modes (no cutoff), lexicographic with mode 0 slowest
std::vector<Index> sector_basis(int m, int N);
// amplitudes <n|U|s> for every n in sector_basis(m, |s|)
CVec passive_apply_fock(const CMat& U, const Index& s);

RMat beamsplitter(double theta, std::pair<int, int> modes, int m);
double beamsplitter_theta(double eta_bs);

DensityOp loss_channel(const DensityOp& rho, const std::vector<double>& eta);

// rho -> V L_eta(rho) V^dagger in the given working cutoffs (rho embedded first).
// throws NumericalError when the leak exceeds max_leak
DensityOp apply_circuit(const DensityOp& rho, const GaussianCircuit& c, const std::vector<int>& cutoffs,
                        double max_leak = 1e-6);
DensityOp apply_circuit(const DensityOp& rho, const GaussianCircuit& c, double max_leak = 1e-6);

// S(xi)^dagger on every mode (used by unbalanced heterodyne)
DensityOp apply_antisqueeze(const DensityOp& rho, const std::vector<cplx>& xi);

CMat random_passive(int m, std::uint64_t seed);
CMat random_near_identity(int m, double strength, std::uint64_t seed);
RMat random_orthogonal(int m, std::uint64_t seed);

bool is_unitary(const CMat& U, double tol = 1e-10);

}  // namespace cvv
