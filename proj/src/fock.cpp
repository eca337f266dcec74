#include "cvverify/fock.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <algorithm>
#include <cmath>

namespace cvv {

cplx CoreState::amplitude(const Index& idx) const {
    auto it = std::lower_bound(coeffs.begin(), coeffs.end(), idx,
                               [](const auto& e, const Index& k) { return e.first < k; });
    if (it != coeffs.end() && it->first == idx) return it->second;
    return 0.0;
}

CVec CoreState::dense(const std::vector<int>& cut) const {
    if (static_cast<int>(cut.size()) != modes) throw ConfigError("dense: cutoff count does not match modes");
    CVec v = CVec::Zero(static_cast<Eigen::Index>(total_dim(cut)));
    for (const auto& [idx, a] : coeffs) {
        bool inside = true;
        for (int i = 0; i < modes; ++i) inside = inside && idx[i] < cut[i];
        if (inside) v(static_cast<Eigen::Index>(flat_index(idx, cut))) = a;
    }
    return v;
}

double CoreState::norm2() const {
    double s = 0;
    for (const auto& e : coeffs) s += std::norm(e.second);
    return s;
}

int CoreState::max_photons() const {
    int m = 0;
    for (const auto& e : coeffs)
        for (int n : e.first) m = std::max(m, n);
    return m;
}

CoreState make_core_state(const AmplitudeMap& coeffs) {
    if (coeffs.empty()) throw ConfigError("core state: no amplitudes");
    CoreState s;
    s.modes = static_cast<int>(coeffs.begin()->first.size());
    if (s.modes == 0) throw ConfigError("core state: zero modes");
    s.cutoffs.assign(s.modes, 1);
    double n2 = 0;
    for (const auto& [idx, a] : coeffs) {
        if (static_cast<int>(idx.size()) != s.modes) throw ConfigError("core state: inconsistent index length");
        for (int n : idx)
            if (n < 0) throw ConfigError("core state: negative photon number");
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw ConfigError("core state: non-finite amplitude");
        if (a == cplx(0.0)) continue;
        s.coeffs.emplace_back(idx, a);
        n2 += std::norm(a);
        for (int i = 0; i < s.modes; ++i) s.cutoffs[i] = std::max(s.cutoffs[i], idx[i] + 1);
    }
    if (n2 <= 0) throw ConfigError("core state: zero norm");
    double inv = 1.0 / std::sqrt(n2);
    for (auto& e : s.coeffs) e.second *= inv;
    return s;
}

CoreState make_core_state(const std::vector<cplx>& amps) {
    AmplitudeMap m;
    for (std::size_t i = 0; i < amps.size(); ++i) m[{static_cast<int>(i)}] = amps[i];
    return make_core_state(m);
}

CoreState core_from_vector(const CVec& v, const std::vector<int>& cutoffs, double drop_tol) {
    if (static_cast<std::size_t>(v.size()) != total_dim(cutoffs)) throw ConfigError("core_from_vector: size mismatch");
    AmplitudeMap m;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > drop_tol) m[multi_index(static_cast<std::size_t>(i), cutoffs)] = v(i);
    return make_core_state(m);
}

CoreState vacuum_core(int modes) { return make_core_state(AmplitudeMap{{Index(modes, 0), 1.0}}); }

CoreState fock_core(const Index& n) { return make_core_state(AmplitudeMap{{n, 1.0}}); }

CoreState tensor(const CoreState& a, const CoreState& b) {
    AmplitudeMap m;
    for (const auto& [ia, xa] : a.coeffs)
        for (const auto& [ib, xb] : b.coeffs) {
            Index k = ia;
            k.insert(k.end(), ib.begin(), ib.end());
            m[k] = xa * xb;
        }
    return make_core_state(m);
}

cplx DensityOp::element(const Index& row, const Index& col) const {
    return matrix(static_cast<Eigen::Index>(flat_index(row, cutoffs)), static_cast<Eigen::Index>(flat_index(col, cutoffs)));
}

void DensityOp::validate(bool check_psd, double truncation_tol) const {
    if (static_cast<int>(cutoffs.size()) != modes || modes <= 0) throw ConfigError("density: bad mode count");
    if (static_cast<std::size_t>(matrix.rows()) != total_dim(cutoffs) || matrix.rows() != matrix.cols())
        throw ConfigError("density: matrix size does not match cutoffs");
    if (!matrix.allFinite()) throw ConfigError("density: non-finite entries");
    double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-9) throw ConfigError("density: not Hermitian");
    if (std::abs(trace() + truncation_leak - 1) > truncation_tol) throw ConfigError("density: trace is not one");
    if (check_psd && min_eigenvalue() < -1e-9) throw ConfigError("density: not positive semidefinite");
}

double DensityOp::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<CMat> es(matrix, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

DensityOp density_from_pure(const CoreState& psi) { return density_from_vector(psi.dense(), psi.cutoffs); }

DensityOp density_from_vector(const CVec& v, const std::vector<int>& cutoffs) {
    if (static_cast<std::size_t>(v.size()) != total_dim(cutoffs)) throw ConfigError("density_from_vector: size mismatch");
    DensityOp r;
    r.modes = static_cast<int>(cutoffs.size());
    r.cutoffs = cutoffs;
    r.matrix = v * v.adjoint();
    return r;
}

DensityOp make_density(const CMat& m, const std::vector<int>& cutoffs) {
    DensityOp r;
    r.modes = static_cast<int>(cutoffs.size());
    r.cutoffs = cutoffs;
    r.matrix = m;
    r.validate();
    return r;
}

DensityOp embed(const DensityOp& rho, const std::vector<int>& cutoffs) {
    if (cutoffs.size() != rho.cutoffs.size()) throw ConfigError("embed: mode count mismatch");
    if (cutoffs == rho.cutoffs) return rho;
    std::size_t d = total_dim(cutoffs), d0 = rho.dim();
    std::vector<long> map(d0, -1);
    for (std::size_t i = 0; i < d0; ++i) {
        Index k = multi_index(i, rho.cutoffs);
        bool inside = true;
        for (std::size_t j = 0; j < k.size(); ++j) inside = inside && k[j] < cutoffs[j];
        if (inside) map[i] = static_cast<long>(flat_index(k, cutoffs));
    }
    DensityOp r;
    r.modes = rho.modes;
    r.cutoffs = cutoffs;
    r.matrix = CMat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    double lost = 0;
    for (std::size_t i = 0; i < d0; ++i) {
        if (map[i] < 0) {
            lost += rho.matrix(i, i).real();
            continue;
        }
        for (std::size_t j = 0; j < d0; ++j)
            if (map[j] >= 0) r.matrix(map[i], map[j]) = rho.matrix(i, j);
    }
    r.truncation_leak = rho.truncation_leak + lost;
    return r;
}

DensityOp tensor(const DensityOp& a, const DensityOp& b) {
    DensityOp r;
    r.modes = a.modes + b.modes;
    r.cutoffs = a.cutoffs;
    r.cutoffs.insert(r.cutoffs.end(), b.cutoffs.begin(), b.cutoffs.end());
    r.matrix = Eigen::kroneckerProduct(a.matrix, b.matrix);
    r.truncation_leak = a.truncation_leak + b.truncation_leak;
    return r;
}

DensityOp partial_trace(const DensityOp& rho, const std::vector<int>& keep) {
    if (keep.empty()) throw ConfigError("partial_trace: nothing kept");
    std::vector<bool> seen(rho.modes, false);
    for (int k : keep) {
        if (k < 0 || k >= rho.modes) throw ConfigError("partial_trace: mode out of range");
        if (seen[k]) throw ConfigError("partial_trace: duplicate mode");
        seen[k] = true;
    }
    std::vector<int> traced;
    for (int i = 0; i < rho.modes; ++i)
        if (!seen[i]) traced.push_back(i);
    std::vector<int> kc, tc;
    for (int k : keep) kc.push_back(rho.cutoffs[k]);
    for (int t : traced) tc.push_back(rho.cutoffs[t]);
    std::size_t dk = total_dim(kc), dt = traced.empty() ? 1 : total_dim(tc);
    auto st = strides(rho.cutoffs);
    // flat offsets of kept and traced parts
    std::vector<std::size_t> ok(dk), ot(dt, 0);
    for (std::size_t i = 0; i < dk; ++i) {
        Index ki = multi_index(i, kc);
        std::size_t o = 0;
        for (std::size_t j = 0; j < keep.size(); ++j) o += ki[j] * st[keep[j]];
        ok[i] = o;
    }
    if (!traced.empty())
        for (std::size_t i = 0; i < dt; ++i) {
            Index ti = multi_index(i, tc);
            std::size_t o = 0;
            for (std::size_t j = 0; j < traced.size(); ++j) o += ti[j] * st[traced[j]];
            ot[i] = o;
        }
    DensityOp r;
    r.modes = static_cast<int>(keep.size());
    r.cutoffs = kc;
    r.truncation_leak = rho.truncation_leak;
    r.matrix = CMat::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t a = 0; a < dk; ++a)
        for (std::size_t b = 0; b < dk; ++b) {
            cplx s = 0;
            for (std::size_t t = 0; t < dt; ++t) s += rho.matrix(ok[a] + ot[t], ok[b] + ot[t]);
            r.matrix(a, b) = s;
        }
    return r;
}

double fidelity_pure(const DensityOp& rho, const CoreState& psi) {
    if (psi.modes != rho.modes) throw ConfigError("fidelity: mode count mismatch");
    cplx s = 0;
    for (const auto& [i, a] : psi.coeffs) {
        bool in_i = true;
        for (int k = 0; k < psi.modes; ++k) in_i = in_i && i[k] < rho.cutoffs[k];
        if (!in_i) continue;
        std::size_t fi = flat_index(i, rho.cutoffs);
        for (const auto& [j, b] : psi.coeffs) {
            bool in_j = true;
            for (int k = 0; k < psi.modes; ++k) in_j = in_j && j[k] < rho.cutoffs[k];
            if (!in_j) continue;
            s += std::conj(a) * rho.matrix(fi, flat_index(j, rho.cutoffs)) * b;
        }
    }
    return std::clamp(s.real(), 0.0, 1.0);
}

std::pair<double, double> trace_distance_bounds(double F) {
    if (!(F >= 0.0 && F <= 1.0)) throw ConfigError("trace_distance_bounds: fidelity outside [0,1]");
    return {1 - std::sqrt(F), std::sqrt(1 - F)};
}

DensityOp apply_local(const DensityOp& rho, int mode, const CMat& op) {
    if (mode < 0 || mode >= rho.modes) throw ConfigError("apply_local: mode out of range");
    int c = rho.cutoffs[mode];
    if (op.rows() != c || op.cols() != c) throw ConfigError("apply_local: operator size mismatch");
    Eigen::Index before = 1, after = 1;
    for (int i = 0; i < mode; ++i) before *= rho.cutoffs[i];
    for (int i = mode + 1; i < rho.modes; ++i) after *= rho.cutoffs[i];
    // each column is a (after x c) column-major slab per 'before' index; multiply by op^T on the right
    auto left = [&](CMat& M, const CMat& A) {
        CMat At = A.transpose();
        CMat tmp(after, c);
        for (Eigen::Index col = 0; col < M.cols(); ++col)
            for (Eigen::Index b = 0; b < before; ++b) {
                Eigen::Map<CMat> slab(M.col(col).data() + b * c * after, after, c);
                tmp.noalias() = slab * At;
                slab = tmp;
            }
    };
    DensityOp r = rho;
    left(r.matrix, op);
    CMat t = r.matrix.adjoint();
    left(t, op);
    r.matrix = t.adjoint();
    return r;
}

double mean_photons(const DensityOp& rho, int mode) {
    if (mode < 0 || mode >= rho.modes) throw ConfigError("mean_photons: mode out of range");
    double s = 0;
    for (std::size_t i = 0; i < rho.dim(); ++i) s += multi_index(i, rho.cutoffs)[mode] * rho.matrix(i, i).real();
    return s;
}

}  // namespace cvv
