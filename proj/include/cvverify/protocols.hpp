#pragma once
// protocol runners and the sample planner

#include "cvverify/backprop.hpp"
#include "cvverify/estimators.hpp"
#include "cvverify/witness.hpp"

namespace cvv {

struct FidelityEstimate {
    double estimate = 0;
    std::size_t N = 0;
    double lambda = 0;     // statistical half-width used
    double bias = 0;
    double delta = 0;
    double range = 0;
    double sample_variance = 0;
    EstimatorConfig config;

    double epsilon() const { return lambda + bias; }
};

// Hoeffding for an estimator with |g| <= R
double hoeffding_delta(std::size_t N, double lambda, double R);
double hoeffding_lambda(std::size_t N, double delta, double R);
std::size_t hoeffding_samples(double lambda, double delta, double R);

// homodyne, single mode. epsilon -> delta(epsilon)
FidelityEstimate protocol1(const SampleBatch& batch, const CoreState& target, double epsilon);
WitnessReport protocol2(const SampleBatch& batch, const std::vector<CoreState>& targets, const HomodyneRule& rule,
                        double epsilon);

// heterodyne k-mode; delta -> lambda
FidelityEstimate protocol3(const SampleBatch& batch, const CoreState& target, const EstimatorConfig& cfg,
                           double delta);
// same on an explicit subset of columns of a (back-propagated) batch
FidelityEstimate protocol3_modes(const SampleBatch& batch, const std::vector<int>& modes, const CoreState& target,
                                 const EstimatorConfig& cfg, double delta);

WitnessReport protocol4(const SampleBatch& batch, const std::vector<CoreState>& targets,
                        const GaussianCircuit& circuit, const Partition& P, const std::vector<EstimatorConfig>& cfgs,
                        double delta);

WitnessReport protocol_doped(const SampleBatch& batch, const CoreState& phi, const GaussianCircuit& circuit, int m,
                             const EstimatorConfig& block_cfg, const EstimatorConfig& vacuum_cfg, double delta);

struct PlanOptions {
    int p_max = 6;
    int fixed_p = 0;          // >0 pins p on every mode
    bool homodyne = false;
    int tau_grid = 60;
};

struct Plan {
    bool feasible = false;
    std::size_t N = 0;
    std::vector<std::vector<int>> p;
    std::vector<double> tau;
    std::vector<double> lambda;
    std::vector<double> bias;
    std::vector<double> range;
    std::vector<double> delta_i;
    double epsilon_total = 0;
    double delta_total = 0;
    double eta = 1;
    Partition partition;
    std::string message;
    double tightest_epsilon = 0;

    // recompute epsilon / delta from the stored parameters; returns max abs mismatch
    double recheck(const std::vector<CoreState>& targets) const;
};

Plan plan_samples(const std::vector<CoreState>& targets, const Partition& P, double epsilon, double delta,
                  double eta = 1.0, const PlanOptions& opt = {});

}  // namespace cvv
