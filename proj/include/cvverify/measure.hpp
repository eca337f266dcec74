#pragma once
// homodyne / heterodyne distributions and samplers

#include "cvverify/fock.hpp"

#include <cstdint>
#include <optional>

namespace cvv {

enum class SampleKind { Homodyne, Heterodyne };
enum class ThetaPolicy { Fixed, Uniform };

struct SampleBatch {
    SampleKind kind = SampleKind::Homodyne;
    int modes = 0;
    std::vector<double> theta;   // homodyne, one per shot
    RMat x;                      // homodyne, shots x modes
    CMat alpha;                  // heterodyne, shots x modes
    double eta = 1.0;
    std::vector<cplx> xi;        // heterodyne unbalancing
    std::uint64_t seed = 0;
    ThetaPolicy policy = ThetaPolicy::Uniform;
    bool rescaled = false;       // outcomes already divided by sqrt(eta)

    std::size_t count() const { return kind == SampleKind::Homodyne ? theta.size() : static_cast<std::size_t>(alpha.rows()); }
    void validate() const;
};

// P_rho(x, theta) for every mode at common theta
double homodyne_pdf(const DensityOp& rho, double theta, const std::vector<double>& x);
double homodyne_pdf(const DensityOp& rho, double theta, double x);
// rescaled lossy pdf: Gaussian convolution, kernel variance (1-eta)/(2 eta)
double noisy_homodyne_pdf(const DensityOp& rho, double theta, double x, double eta);

double husimi_q(const DensityOp& rho, const std::vector<cplx>& alpha);

namespace detail {
// one pure component of the mixture: support list and per-entry data
struct PureComponent {
    std::vector<Index> idx;
    std::vector<cplx> amp;
    std::vector<int> nphot;
    std::vector<double> cdf;   // cumulative |amp|/S
    double S = 0;
};
// inverse-CDF table of u_n(x)^2 on a uniform grid with exact cell masses
struct SquareTable {
    double x0 = 0, h = 0;
    std::vector<double> F;
};
}  // namespace detail

class HomodyneSampler {
public:
    HomodyneSampler(const DensityOp& rho, double eta = 1.0);
    SampleBatch sample(std::size_t n, std::uint64_t seed, ThetaPolicy policy = ThetaPolicy::Uniform,
                       double fixed_theta = 0.0) const;

private:
    std::vector<detail::PureComponent> comps_;
    std::vector<double> comp_cdf_;
    std::vector<detail::SquareTable> tables_;  // u_n^2 inverse-CDF per n
    std::vector<int> cutoffs_;
    int modes_;
    double eta_;
};

class HeterodyneSampler {
public:
    HeterodyneSampler(const DensityOp& rho, const std::vector<cplx>& xi = {}, double eta = 1.0);
    SampleBatch sample(std::size_t n, std::uint64_t seed) const;
    double acceptance() const { return acceptance_; }

private:
    std::vector<detail::PureComponent> comps_;
    std::vector<double> comp_cdf_;
    std::vector<int> cutoffs_;
    int modes_;
    double eta_;
    std::vector<cplx> xi_;
    double acceptance_ = 1.0;
};

SampleBatch sample_parallel_homodyne(const DensityOp& rho, std::size_t n, std::uint64_t seed,
                                     ThetaPolicy policy = ThetaPolicy::Uniform, double fixed_theta = 0.0,
                                     double eta = 1.0);
SampleBatch sample_heterodyne(const DensityOp& rho, std::size_t n, std::uint64_t seed,
                              const std::vector<cplx>& xi = {}, double eta = 1.0);

// divide raw lossy outcomes by sqrt(eta); no-op when already rescaled or eta == 1
SampleBatch rescale_lossy(const SampleBatch& b);

inline constexpr double kAcceptanceFloor = 1e-4;
inline constexpr std::size_t kShotBlock = 4096;

}  // namespace cvv
