#pragma once
// numerical examples: lossy boson sampling and the two beamsplitter circuits

#include "cvverify/common.hpp"

#include <cstdint>
#include <string>

namespace cvv {

struct ExperimentConfig {
    std::string id = "example2";
    std::vector<double> eta_grid = linspace(0.0, 1.0, 21);
    std::uint64_t seed = 2024;
    int family = 20;          // number of perturbed interferometers (example 1)
    double eps_v = 0.1;       // perturbation strength (example 1)
    int cutoff = 7;           // per mode truncation (example 1)
    std::size_t sampled = 0;  // >0: also run protocol 4 with this many shots (examples 2, 3)
    double tau = 0.3;
    int p = 2;
    double delta = 0.1;
    void validate() const;
};

struct Curves {
    std::string title;
    std::vector<double> grid;
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    const std::vector<double>& col(const std::string& name) const;
};

Curves run_example1(const ExperimentConfig& cfg);
Curves run_example2(const ExperimentConfig& cfg);
Curves run_example3(const ExperimentConfig& cfg);
Curves run_experiment(const ExperimentConfig& cfg);

// first eta where the curve becomes >= 0 (linear interpolation); NaN if never
double zero_crossing(const std::vector<double>& grid, const std::vector<double>& y);

std::string curves_csv(const Curves& c);
std::string curves_svg(const Curves& c);

}  // namespace cvv
