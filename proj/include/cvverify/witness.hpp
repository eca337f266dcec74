#pragma once
// k-mode fidelity witnesses and the doped-Gaussian variant

#include "cvverify/estimators.hpp"
#include "cvverify/fock.hpp"

namespace cvv {

struct Partition {
    std::vector<std::vector<int>> blocks;  // 0-based modes

    int modes() const;
    void validate(int m) const;
    // "1,2|3,4" (1-based)
    static Partition parse(const std::string& s, int m);
    static Partition uniform(int m, int k);  // contiguous blocks of size k
    std::string str() const;                 // 1-based text form
};

struct WitnessReport {
    double value = 0;
    Partition partition;
    std::vector<double> fidelity_terms;
    std::vector<double> lambda;        // per block statistical error
    std::vector<double> bias;          // per block bias
    double epsilon_statistical = 0;    // sum lambda
    double epsilon_bias = 0;           // sum bias
    double delta = 0;
    std::size_t N = 0;
    std::vector<EstimatorConfig> configs;
    std::vector<double> ranges;
    std::string measurement;           // "homodyne" | "heterodyne"

    double epsilon() const { return epsilon_statistical + epsilon_bias; }
};

double witness_from_fidelities(const std::vector<double>& F, const Partition& P);

// per-block factors of a block-product target, modes re-indexed inside each block
std::vector<CoreState> factor_target(const CoreState& target, const Partition& P, double tol = 1e-10);
CoreState restrict_modes(const CoreState& psi, const std::vector<int>& modes);

std::vector<double> block_fidelities(const DensityOp& rho, const CoreState& target, const Partition& P);
double exact_witness(const DensityOp& rho, const CoreState& target, const Partition& P);

struct SandwichCheck {
    bool lower_ok, upper_ok, ordering_ok;
    double lower_slack, upper_slack, ordering_slack;
    double F, W, W1;
};
SandwichCheck check_sandwich(const DensityOp& rho, const CoreState& target, const Partition& P, double tol = 1e-10);

// first kt modes carry phi, the remaining m-kt modes vacuum
double doped_witness(const DensityOp& rho, const CoreState& phi, int m);
struct DopedSandwich {
    double F, W, lower, lower_slack, upper_slack;
};
DopedSandwich doped_sandwich(const DensityOp& rho, const CoreState& phi, int m);

}  // namespace cvv
