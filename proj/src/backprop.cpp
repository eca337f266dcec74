#include "cvverify/backprop.hpp"

#include <algorithm>
#include <cmath>

namespace cvv {

namespace {

std::vector<cplx> padded(const std::vector<cplx>& v, int m) { return v.empty() ? std::vector<cplx>(m, 0.0) : v; }

bool same_xi(const std::vector<cplx>& a, const std::vector<cplx>& b, int m) {
    auto pa = padded(a, m), pb = padded(b, m);
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (std::abs(pa[i] - pb[i]) > 1e-12) return false;
    return true;
}

CVec to_vec(const std::vector<cplx>& v) {
    CVec r(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) r(static_cast<Eigen::Index>(i)) = v[i];
    return r;
}

GaussianCircuit lossless(const GaussianCircuit& c) {
    GaussianCircuit r = c;
    r.eta.assign(c.modes(), 1.0);
    return r;
}

// S|gamma> cropped to cut; S is empty for the balanced case
std::vector<cplx> squeezed_coherent(cplx gamma, const CMat& S, int cut) {
    int big = S.size() ? static_cast<int>(S.rows()) : cut;
    CVec coh(big);
    coh(0) = std::exp(-0.5 * std::norm(gamma));
    for (int n = 1; n < big; ++n) coh(n) = coh(n - 1) * gamma / std::sqrt(double(n));
    CVec v = S.size() ? CVec(S * coh) : coh;
    return std::vector<cplx>(v.data(), v.data() + cut);
}

// <v|rho|v> with |v> = tensor product of per-mode vectors
double expect_product(const DensityOp& rho, const std::vector<std::vector<cplx>>& per_mode) {
    std::size_t d = rho.dim();
    CVec b(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        Index k = multi_index(i, rho.cutoffs);
        cplx v = 1;
        for (int m = 0; m < rho.modes; ++m) v *= per_mode[m][k[m]];
        b(static_cast<Eigen::Index>(i)) = v;
    }
    return (b.adjoint() * rho.matrix * b)(0, 0).real();
}

}  // namespace

HomodyneRule::HomodyneRule(const RMat& O_, const std::vector<cplx>& beta_) : O(O_), beta(beta_) {
    if (O.rows() != O.cols() || O.rows() != static_cast<Eigen::Index>(beta.size()))
        throw ConfigError("homodyne rule: block must be m x m with one beta per mode");
    if ((O.transpose() * O - RMat::Identity(O.rows(), O.rows())).cwiseAbs().maxCoeff() > 1e-10)
        throw ConfigError("homodyne rule: block is not orthogonal");
}

HomodyneRule HomodyneRule::from_circuit(const GaussianCircuit& c) {
    c.validate();
    for (auto x : c.xi)
        if (x != cplx(0.0)) throw ConfigError("homodyne rule: squeezing cannot be back-propagated through homodyne");
    if (c.U.imag().cwiseAbs().maxCoeff() > 1e-10) throw ConfigError("homodyne rule: U must be real orthogonal");
    std::vector<cplx> b;
    for (auto x : c.beta) b.push_back(std::sqrt(2.0) * x);
    return HomodyneRule(c.U.real(), b);
}

HomodyneRule HomodyneRule::inverse() const {
    RMat Ot = O.transpose();
    CVec b = -(Ot.cast<cplx>() * to_vec(beta));
    return HomodyneRule(Ot, std::vector<cplx>(b.data(), b.data() + b.size()));
}

HeterodyneRule::HeterodyneRule(const CMat& U_, const std::vector<cplx>& beta_, const std::vector<cplx>& xi_)
    : U(U_), beta(beta_), xi(xi_) {
    if (U.rows() != U.cols() || U.rows() != static_cast<Eigen::Index>(beta.size()))
        throw ConfigError("heterodyne rule: U must be m x m with one beta per mode");
    if (!xi.empty() && xi.size() != beta.size()) throw ConfigError("heterodyne rule: one xi per mode");
    if (!is_unitary(U, 1e-10)) throw ConfigError("heterodyne rule: U is not unitary");
}

HeterodyneRule HeterodyneRule::from_circuit(const GaussianCircuit& c) {
    c.validate();
    return HeterodyneRule(c.U, c.beta, c.xi);
}

HeterodyneRule HeterodyneRule::inverse() const {
    CMat Ud = U.adjoint();
    CVec b = -(Ud * to_vec(beta));
    return HeterodyneRule(Ud, std::vector<cplx>(b.data(), b.data() + b.size()));
}

SampleBatch backprop_homodyne(const SampleBatch& batch, const HomodyneRule& rule) {
    if (batch.kind != SampleKind::Homodyne) throw ConfigError("parallel homodyne required");
    if (batch.modes != rule.O.rows()) throw ConfigError("backprop: rule and batch mode counts differ");
    batch.validate();
    SampleBatch out = rescale_lossy(batch);
    RVec re(batch.modes), im(batch.modes);
    for (int m = 0; m < batch.modes; ++m) {
        re(m) = rule.beta[m].real();
        im(m) = rule.beta[m].imag();
    }
    RMat Ot = rule.O.transpose();
    for (Eigen::Index i = 0; i < out.x.rows(); ++i) {
        double th = out.theta[static_cast<std::size_t>(i)];
        RVec shift = re * std::cos(th) + im * std::sin(th);
        RVec x = out.x.row(i).transpose() - shift;
        out.x.row(i) = (Ot * x).transpose();
    }
    return out;
}

SampleBatch backprop_heterodyne(const SampleBatch& batch, const HeterodyneRule& rule) {
    if (batch.kind != SampleKind::Heterodyne) throw ConfigError("backprop: heterodyne batch required");
    if (batch.modes != rule.U.rows()) throw ConfigError("backprop: rule and batch mode counts differ");
    if (!same_xi(batch.xi, rule.xi, batch.modes)) throw ConfigError("xi of batch and rule must match");
    batch.validate();
    SampleBatch out = rescale_lossy(batch);
    CMat Ud = rule.U.adjoint();
    CVec b = to_vec(rule.beta);
    for (Eigen::Index i = 0; i < out.alpha.rows(); ++i) {
        CVec g = out.alpha.row(i).transpose() - b;
        out.alpha.row(i) = (Ud * g).transpose();
    }
    out.xi.clear();
    return out;
}

double verify_povm_identity_heterodyne(const GaussianCircuit& circuit, const std::vector<DensityOp>& probes,
                                       const std::vector<std::vector<cplx>>& outcomes, int work_cutoff) {
    GaussianCircuit c = lossless(circuit);
    c.validate();
    int m = c.modes();
    HeterodyneRule rule = HeterodyneRule::from_circuit(c);
    std::vector<CMat> S(m);
    for (int i = 0; i < m; ++i)
        if (c.xi[i] != cplx(0.0)) S[i] = squeezing_op(c.xi[i], work_cutoff + 40 + squeezing_pad(c.xi[i]));
    double worst = 0;
    for (const auto& rho : probes) {
        if (rho.modes != m) throw ConfigError("povm check: probe mode count differs from circuit");
        DensityOp out = apply_circuit(rho, c, std::vector<int>(m, work_cutoff), 1.0);
        for (const auto& gamma : outcomes) {
            if (static_cast<int>(gamma.size()) != m) throw ConfigError("povm check: outcome length differs");
            std::vector<std::vector<cplx>> sg(m), ag(m);
            CVec a = rule.U.adjoint() * (to_vec(gamma) - to_vec(rule.beta));
            for (int i = 0; i < m; ++i) {
                sg[i] = squeezed_coherent(gamma[i], S[i], work_cutoff);
                ag[i] = squeezed_coherent(a(i), CMat(), rho.cutoffs[i]);
            }
            double lhs = expect_product(rho, ag) / std::pow(kPi, m);
            double rhs = expect_product(out, sg) / std::pow(kPi, m);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

double verify_povm_identity_homodyne(const GaussianCircuit& circuit, const std::vector<DensityOp>& probes,
                                     const std::vector<std::vector<double>>& outcomes,
                                     const std::vector<double>& thetas, int work_cutoff) {
    GaussianCircuit c = lossless(circuit);
    HomodyneRule rule = HomodyneRule::from_circuit(c);
    int m = c.modes();
    double worst = 0;
    for (const auto& rho : probes) {
        if (rho.modes != m) throw ConfigError("povm check: probe mode count differs from circuit");
        DensityOp out = apply_circuit(rho, c, std::vector<int>(m, work_cutoff), 1.0);
        for (double th : thetas)
            for (const auto& xp : outcomes) {
                if (static_cast<int>(xp.size()) != m) throw ConfigError("povm check: outcome length differs");
                std::vector<double> x(m);
                for (int i = 0; i < m; ++i) {
                    double s = 0;
                    for (int j = 0; j < m; ++j)
                        s += rule.O(j, i) *
                             (xp[j] - rule.beta[j].real() * std::cos(th) - rule.beta[j].imag() * std::sin(th));
                    x[i] = s;
                }
                worst = std::max(worst, std::abs(homodyne_pdf(rho, th, x) - homodyne_pdf(out, th, xp)));
            }
    }
    return worst;
}

}  // namespace cvv
