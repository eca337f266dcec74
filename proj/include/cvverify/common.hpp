#pragma once
// shared types, errors, multi-index helpers, seeded streams, shard runner

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvv {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Index = std::vector<int>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// bad input / config  -> CLI exit 2
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
// numerics failed (leak, non-convergence, acceptance floor) -> CLI exit 3
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double factorial(int n);
double log_factorial(int n);
double binom(int n, int k);

// row-major, mode 0 slowest
std::size_t total_dim(const std::vector<int>& cutoffs);
std::vector<std::size_t> strides(const std::vector<int>& cutoffs);
std::size_t flat_index(const Index& idx, const std::vector<int>& cutoffs);
Index multi_index(std::size_t flat, const std::vector<int>& cutoffs);
int photon_number(const Index& idx);

// splitmix64 based seed derivation; stream i of seed s
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// CVVERIFY_THREADS, default hardware concurrency, at least 1
int thread_count();

// run fn(block) for block in [0,nblocks) on up to thread_count() threads.
// each block writes only its own output slot, so results do not depend on the thread count
void parallel_blocks(std::size_t nblocks, const std::function<void(std::size_t)>& fn);

// pairwise sum, fixed association order
double pairwise_sum(const double* v, std::size_t n);

std::vector<double> linspace(double a, double b, int n);

// Gauss-Legendre nodes / weights on [-1,1]
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace cvv
