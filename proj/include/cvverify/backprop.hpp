#pragma once
// classical back-propagation of parallel homodyne and heterodyne outcomes

#include "cvverify/gaussian.hpp"
#include "cvverify/measure.hpp"

namespace cvv {

struct HomodyneRule {
    RMat O;                  // (S_O)_1, orthogonal
    std::vector<cplx> beta;  // quadrature units
    HomodyneRule(const RMat& O, const std::vector<cplx>& beta);
    // rule for V = D(beta) U with U real orthogonal (beta scaled by sqrt2)
    static HomodyneRule from_circuit(const GaussianCircuit& c);
    HomodyneRule inverse() const;
};

struct HeterodyneRule {
    CMat U;
    std::vector<cplx> beta;
    std::vector<cplx> xi;
    HeterodyneRule(const CMat& U, const std::vector<cplx>& beta, const std::vector<cplx>& xi = {});
    static HeterodyneRule from_circuit(const GaussianCircuit& c);
    HeterodyneRule inverse() const;  // balanced inverse map gamma = U alpha + beta
};

SampleBatch backprop_homodyne(const SampleBatch& batch, const HomodyneRule& rule);
SampleBatch backprop_heterodyne(const SampleBatch& batch, const HeterodyneRule& rule);

// max |Tr[rho Pi_{g(lambda)}] - Tr[V rho V^dagger Pi_lambda]| over probes
double verify_povm_identity_heterodyne(const GaussianCircuit& circuit, const std::vector<DensityOp>& probes,
                                       const std::vector<std::vector<cplx>>& outcomes, int work_cutoff);
double verify_povm_identity_homodyne(const GaussianCircuit& circuit, const std::vector<DensityOp>& probes,
                                     const std::vector<std::vector<double>>& outcomes,
                                     const std::vector<double>& thetas, int work_cutoff);

}  // namespace cvv
