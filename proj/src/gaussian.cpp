#include "cvverify/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace cvv {

void GaussianCircuit::validate() const {
    int m = modes();
    if (m <= 0) throw ConfigError("circuit: no modes");
    if (static_cast<int>(xi.size()) != m || static_cast<int>(eta.size()) != m)
        throw ConfigError("circuit: beta, xi and eta must have one entry per mode");
    if (U.rows() != m || U.cols() != m) throw ConfigError("circuit: U must be m x m");
    if (!is_unitary(U, 1e-8)) throw ConfigError("circuit: U is not unitary");
    for (double e : eta)
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("circuit: eta must lie in (0,1]");
    for (auto b : beta)
        if (!std::isfinite(b.real()) || !std::isfinite(b.imag())) throw ConfigError("circuit: non-finite beta");
    for (auto x : xi)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw ConfigError("circuit: non-finite xi");
}

GaussianCircuit GaussianCircuit::identity(int m) {
    GaussianCircuit c;
    c.beta.assign(m, 0.0);
    c.xi.assign(m, 0.0);
    c.eta.assign(m, 1.0);
    c.U = CMat::Identity(m, m);
    return c;
}

OrthogonalSymplectic::OrthogonalSymplectic(const RMat& b) : block(b) {
    if (b.rows() != b.cols() || b.rows() % 2 != 0) throw ConfigError("orthogonal symplectic: block must be 2m x 2m");
    if ((b * b.transpose() - RMat::Identity(b.rows(), b.rows())).cwiseAbs().maxCoeff() > 1e-9)
        throw ConfigError("orthogonal symplectic: block is not orthogonal");
    int m = static_cast<int>(b.rows() / 2);
    RMat J = RMat::Zero(2 * m, 2 * m);
    J.topRightCorner(m, m) = RMat::Identity(m, m);
    J.bottomLeftCorner(m, m) = -RMat::Identity(m, m);
    if ((b * J * b.transpose() - J).cwiseAbs().maxCoeff() > 1e-9)
        throw ConfigError("orthogonal symplectic: block is not symplectic");
}

int displacement_pad(cplx alpha) {
    double a = std::abs(alpha);
    if (a == 0) return 0;
    return static_cast<int>(std::ceil(8 * a * a + 10));
}

int squeezing_pad(cplx xi) {
    double r = std::abs(xi);
    if (r == 0) return 0;
    double t = std::tanh(r);
    return std::min(200, static_cast<int>(std::ceil(18.5 / -std::log(t))) + 12);
}

namespace {

CMat annihilation(int d) {
    CMat a = CMat::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

}  // namespace

CMat displacement_op(cplx alpha, int cutoff) {
    if (cutoff < 1) throw ConfigError("displacement: cutoff must be positive");
    if (alpha == cplx(0.0)) return CMat::Identity(cutoff, cutoff);
    int P = cutoff + displacement_pad(alpha) + static_cast<int>(std::ceil(4 * std::abs(alpha) * std::sqrt(cutoff)));
    CMat a = annihilation(P);
    CMat G = alpha * a.adjoint() - std::conj(alpha) * a;
    CMat D = G.exp();
    return D.topLeftCorner(cutoff, cutoff);
}

CMat squeezing_op(cplx xi, int cutoff) {
    if (cutoff < 1) throw ConfigError("squeezing: cutoff must be positive");
    if (xi == cplx(0.0)) return CMat::Identity(cutoff, cutoff);
    double grow = std::cosh(2 * std::abs(xi));
    int P = static_cast<int>(std::ceil(cutoff * grow)) + squeezing_pad(xi) + 10;
    CMat a = annihilation(P);
    CMat G = 0.5 * (xi * a * a - std::conj(xi) * a.adjoint() * a.adjoint());
    CMat S = G.exp();
    return S.topLeftCorner(cutoff, cutoff);
}

cplx permanent(const CMat& A) {
    if (A.rows() != A.cols()) throw ConfigError("permanent: matrix must be square");
    int n = static_cast<int>(A.rows());
    if (n == 0) return 1.0;
    if (n > 30) throw ConfigError("permanent: matrix too large");
    // Ryser with Gray code
    std::vector<cplx> rowsum(n, 0.0);
    cplx total = 0;
    unsigned long long prev = 0, N = 1ULL << n;
    for (unsigned long long k = 1; k < N; ++k) {
        unsigned long long g = k ^ (k >> 1);
        unsigned long long diff = g ^ prev;
        int j = __builtin_ctzll(diff);
        double sgn = (g & diff) ? 1.0 : -1.0;
        for (int i = 0; i < n; ++i) rowsum[i] += sgn * A(i, j);
        prev = g;
        cplx prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= rowsum[i];
        total += ((n - __builtin_popcountll(g)) % 2 == 0 ? 1.0 : -1.0) * prod;
    }
    return total;
}

namespace {

void sector_rec(int m, int N, int mode, Index& cur, std::vector<Index>& out) {
    if (mode == m - 1) {
        cur[mode] = N;
        out.push_back(cur);
        return;
    }
    for (int n = 0; n <= N; ++n) {
        cur[mode] = n;
        sector_rec(m, N - n, mode + 1, cur, out);
    }
}

// U|s> built by applying sum_i U_ij a_i^dagger, s_j times per mode j
std::map<Index, cplx> apply_creations(const CMat& U, const Index& s) {
    int m = static_cast<int>(U.rows());
    std::map<Index, cplx> st{{Index(m, 0), 1.0}};
    double norm = 1;
    for (int j = 0; j < m; ++j) {
        norm *= factorial(s[j]);
        for (int r = 0; r < s[j]; ++r) {
            std::map<Index, cplx> nx;
            for (const auto& [idx, a] : st)
                for (int i = 0; i < m; ++i) {
                    if (U(i, j) == cplx(0.0)) continue;
                    Index k = idx;
                    k[i] += 1;
                    nx[k] += U(i, j) * std::sqrt(static_cast<double>(k[i])) * a;
                }
            st.swap(nx);
        }
    }
    double inv = 1 / std::sqrt(norm);
    for (auto& e : st) e.second *= inv;
    return st;
}

bool is_identity(const CMat& U) { return (U - CMat::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

std::vector<Index> sector_basis(int m, int N) {
    if (m <= 0 || N < 0) throw ConfigError("sector_basis: bad arguments");
    std::vector<Index> out;
    Index cur(m, 0);
    sector_rec(m, N, 0, cur, out);
    return out;
}

CVec passive_apply_fock(const CMat& U, const Index& s) {
    if (U.rows() != U.cols() || static_cast<std::size_t>(U.rows()) != s.size())
        throw ConfigError("passive_apply_fock: size mismatch");
    auto basis = sector_basis(static_cast<int>(s.size()), photon_number(s));
    auto st = apply_creations(U, s);
    CVec v = CVec::Zero(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        auto it = st.find(basis[i]);
        if (it != st.end()) v(static_cast<Eigen::Index>(i)) = it->second;
    }
    return v;
}

CMat passive_fock_lift(const CMat& U, const std::vector<int>& cutoffs) {
    if (U.rows() != U.cols() || static_cast<std::size_t>(U.rows()) != cutoffs.size())
        throw ConfigError("passive lift: U size does not match modes");
    if (!is_unitary(U, 1e-8)) throw ConfigError("passive lift: U is not unitary");
    std::size_t d = total_dim(cutoffs);
    CMat L = CMat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t c = 0; c < d; ++c) {
        auto st = apply_creations(U, multi_index(c, cutoffs));
        for (const auto& [idx, a] : st) {
            bool inside = true;
            for (std::size_t i = 0; i < idx.size(); ++i) inside = inside && idx[i] < cutoffs[i];
            if (inside) L(static_cast<Eigen::Index>(flat_index(idx, cutoffs)), static_cast<Eigen::Index>(c)) = a;
        }
    }
    return L;
}

RMat beamsplitter(double theta, std::pair<int, int> modes, int m) {
    auto [i, j] = modes;
    if (i == j || i < 0 || j < 0 || i >= m || j >= m) throw ConfigError("beamsplitter: bad mode pair");
    RMat B = RMat::Identity(m, m);
    double c = std::cos(theta), s = std::sin(theta);
    if (theta == 0) return B;
    B(i, i) = c;
    B(j, j) = c;
    B(i, j) = -s;
    B(j, i) = s;
    return B;
}

double beamsplitter_theta(double eta_bs) {
    if (!(eta_bs >= 0 && eta_bs <= 1)) throw ConfigError("beamsplitter: transmittance outside [0,1]");
    return std::acos(std::sqrt(eta_bs));
}

DensityOp loss_channel(const DensityOp& rho, const std::vector<double>& eta) {
    if (static_cast<int>(eta.size()) != rho.modes) throw ConfigError("loss: one eta per mode");
    for (double e : eta)
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("loss: eta must lie in (0,1]");
    DensityOp r = rho;
    auto st = strides(rho.cutoffs);
    std::size_t d = rho.dim();
    std::vector<Index> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = multi_index(i, rho.cutoffs);
    for (int k = 0; k < rho.modes; ++k) {
        double e = eta[k];
        if (e == 1.0) continue;
        CMat out = CMat::Zero(r.matrix.rows(), r.matrix.cols());
        for (std::size_t i = 0; i < d; ++i) {
            int n = idx[i][k];
            for (std::size_t j = 0; j < d; ++j) {
                cplx v = r.matrix(i, j);
                if (v == cplx(0.0)) continue;
                int np = idx[j][k];
                for (int q = 0; q <= std::min(n, np); ++q) {
                    double w = std::sqrt(binom(n, q) * binom(np, q)) * std::pow(e, 0.5 * (n + np) - q) * std::pow(1 - e, q);
                    out(i - q * st[k], j - q * st[k]) += w * v;
                }
            }
        }
        r.matrix = out;
    }
    return r;
}

DensityOp apply_circuit(const DensityOp& rho, const GaussianCircuit& c, const std::vector<int>& cutoffs,
                        double max_leak) {
    c.validate();
    if (c.modes() != rho.modes) throw ConfigError("apply_circuit: circuit and state mode counts differ");
    if (cutoffs.size() != rho.cutoffs.size()) throw ConfigError("apply_circuit: one cutoff per mode");
    double in_total = rho.trace() + rho.truncation_leak;
    DensityOp r;
    if (!is_identity(c.U)) {
        // photon number is conserved, so the lift only needs the occupied sectors
        int ntot = 0;
        for (std::size_t i = 0; i < cutoffs.size(); ++i) ntot += std::min(cutoffs[i], rho.cutoffs[i]) - 1;
        std::vector<int> lc = cutoffs;
        for (auto& x : lc) x = std::min(x, ntot + 1);
        r = loss_channel(embed(rho, lc), c.eta);
        CMat L = passive_fock_lift(c.U, lc);
        r.matrix = L * r.matrix * L.adjoint();
        r = embed(r, cutoffs);
    } else {
        r = loss_channel(embed(rho, cutoffs), c.eta);
    }
    for (int i = 0; i < r.modes; ++i)
        if (c.beta[i] != cplx(0.0)) r = apply_local(r, i, displacement_op(c.beta[i], cutoffs[i]));
    for (int i = 0; i < r.modes; ++i)
        if (c.xi[i] != cplx(0.0)) r = apply_local(r, i, squeezing_op(c.xi[i], cutoffs[i]));
    r.truncation_leak = std::max(0.0, in_total - r.trace());
    if (r.truncation_leak - rho.truncation_leak > max_leak)
        throw NumericalError("apply_circuit: truncation leak " + std::to_string(r.truncation_leak) +
                             " exceeds tolerance, raise the cutoffs");
    return r;
}

DensityOp apply_circuit(const DensityOp& rho, const GaussianCircuit& c, double max_leak) {
    c.validate();
    if (c.modes() != rho.modes) throw ConfigError("apply_circuit: circuit and state mode counts differ");
    std::vector<int> cut = rho.cutoffs;
    bool diag = (c.U - CMat(c.U.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    if (!diag) {
        int ntot = 0;
        for (int x : rho.cutoffs) ntot += x - 1;
        for (auto& x : cut) x = ntot + 1;
    }
    for (int i = 0; i < rho.modes; ++i) {
        double b = std::abs(c.beta[i]);
        if (b > 0) cut[i] += static_cast<int>(std::ceil(b * b + 8 * b * std::sqrt(cut[i]) + 12));
        if (c.xi[i] != cplx(0.0))
            cut[i] = static_cast<int>(std::ceil(cut[i] * std::cosh(2 * std::abs(c.xi[i])))) + squeezing_pad(c.xi[i]);
    }
    return apply_circuit(rho, c, cut, max_leak);
}

DensityOp apply_antisqueeze(const DensityOp& rho, const std::vector<cplx>& xi) {
    if (static_cast<int>(xi.size()) != rho.modes) throw ConfigError("antisqueeze: one xi per mode");
    std::vector<int> cut = rho.cutoffs;
    for (int i = 0; i < rho.modes; ++i)
        if (xi[i] != cplx(0.0))
            cut[i] = static_cast<int>(std::ceil(cut[i] * std::cosh(2 * std::abs(xi[i])))) + squeezing_pad(xi[i]);
    double in_total = rho.trace() + rho.truncation_leak;
    DensityOp r = embed(rho, cut);
    for (int i = 0; i < rho.modes; ++i)
        if (xi[i] != cplx(0.0)) r = apply_local(r, i, squeezing_op(-xi[i], cut[i]));
    r.truncation_leak = std::max(0.0, in_total - r.trace());
    if (r.truncation_leak - rho.truncation_leak > 1e-6) throw NumericalError("antisqueeze: truncation leak too large");
    return r;
}

CMat random_passive(int m, std::uint64_t seed) {
    if (m <= 0) throw ConfigError("random_passive: m must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CMat Z(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) Z(i, j) = cplx(nd(rng), nd(rng)) / std::sqrt(2.0);
    Eigen::HouseholderQR<CMat> qr(Z);
    CMat Q = qr.householderQ();
    CMat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < m; ++j) {
        cplx d = R(j, j);
        Q.col(j) *= d / std::abs(d);
    }
    return Q;
}

CMat random_near_identity(int m, double strength, std::uint64_t seed) {
    if (m <= 0) throw ConfigError("random_near_identity: m must be positive");
    if (strength == 0) return CMat::Identity(m, m);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CMat H(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) H(i, j) = cplx(nd(rng), nd(rng));
    H = 0.5 * (H + H.adjoint()).eval();
    H /= H.norm();
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    CVec ph(m);
    for (int i = 0; i < m; ++i) ph(i) = std::exp(kI * strength * es.eigenvalues()(i));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

RMat random_orthogonal(int m, std::uint64_t seed) {
    if (m <= 0) throw ConfigError("random_orthogonal: m must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    RMat Z(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) Z(i, j) = nd(rng);
    Eigen::HouseholderQR<RMat> qr(Z);
    RMat Q = qr.householderQ();
    for (int j = 0; j < m; ++j)
        if (qr.matrixQR()(j, j) < 0) Q.col(j) *= -1;
    return Q;
}

bool is_unitary(const CMat& U, double tol) {
    if (U.rows() != U.cols() || U.rows() == 0) return false;
    return (U.adjoint() * U - CMat::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff() < tol;
}

}  // namespace cvv
