#include "cvverify/witness.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace cvv {

int Partition::modes() const {
    int n = 0;
    for (const auto& b : blocks) n += static_cast<int>(b.size());
    return n;
}

void Partition::validate(int m) const {
    if (blocks.empty()) throw ConfigError("partition: no blocks");
    std::vector<int> seen(m, 0);
    for (const auto& b : blocks) {
        if (b.empty()) throw ConfigError("partition: empty block");
        for (int i : b) {
            if (i < 0 || i >= m) throw ConfigError("partition: mode out of range");
            if (seen[i]++) throw ConfigError("partition: blocks overlap");
        }
    }
    for (int i = 0; i < m; ++i)
        if (!seen[i]) throw ConfigError("partition: blocks do not cover every mode");
}

Partition Partition::parse(const std::string& s, int m) {
    Partition p;
    std::stringstream bs(s);
    std::string block;
    while (std::getline(bs, block, '|')) {
        std::vector<int> b;
        std::stringstream ms(block);
        std::string tok;
        while (std::getline(ms, tok, ',')) {
            tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
            if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit))
                throw ConfigError("partition: cannot parse '" + s + "'");
            b.push_back(std::stoi(tok) - 1);
        }
        if (!block.empty() && block.back() == ',') throw ConfigError("partition: cannot parse '" + s + "'");
        p.blocks.push_back(b);
    }
    if (!s.empty() && s.back() == '|') throw ConfigError("partition: cannot parse '" + s + "'");
    p.validate(m);
    return p;
}

Partition Partition::uniform(int m, int k) {
    if (m <= 0 || k <= 0 || m % k != 0) throw ConfigError("partition: block size must divide the mode count");
    Partition p;
    for (int i = 0; i < m; i += k) {
        std::vector<int> b;
        for (int j = 0; j < k; ++j) b.push_back(i + j);
        p.blocks.push_back(b);
    }
    return p;
}

std::string Partition::str() const {
    std::string s;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (b) s += '|';
        for (std::size_t j = 0; j < blocks[b].size(); ++j) {
            if (j) s += ',';
            s += std::to_string(blocks[b][j] + 1);
        }
    }
    return s;
}

double witness_from_fidelities(const std::vector<double>& F, const Partition& P) {
    if (F.size() != P.blocks.size()) throw ConfigError("witness: one fidelity per block required");
    double w = 1;
    for (double f : F) {
        if (!(f >= -1e-9 && f <= 1 + 1e-9)) throw ConfigError("witness: fidelity outside [0,1]");
        w -= 1 - f;
    }
    return w;
}

CoreState restrict_modes(const CoreState& psi, const std::vector<int>& modes) {
    std::vector<int> rest;
    for (int i = 0; i < psi.modes; ++i)
        if (std::find(modes.begin(), modes.end(), i) == modes.end()) rest.push_back(i);
    std::vector<int> bc, rc;
    for (int i : modes) bc.push_back(psi.cutoffs.at(i));
    for (int i : rest) rc.push_back(psi.cutoffs[i]);
    if (rest.empty()) {
        // reorder only
        AmplitudeMap m;
        for (const auto& [idx, a] : psi.coeffs) {
            Index k;
            for (int i : modes) k.push_back(idx[i]);
            m[k] = a;
        }
        return make_core_state(m);
    }
    std::size_t db = total_dim(bc), dr = total_dim(rc);
    CMat M = CMat::Zero(static_cast<Eigen::Index>(db), static_cast<Eigen::Index>(dr));
    for (const auto& [idx, a] : psi.coeffs) {
        Index kb, kr;
        for (int i : modes) kb.push_back(idx[i]);
        for (int i : rest) kr.push_back(idx[i]);
        M(flat_index(kb, bc), flat_index(kr, rc)) = a;
    }
    Eigen::JacobiSVD<CMat> svd(M, Eigen::ComputeThinU);
    auto sv = svd.singularValues();
    double tail = 0;
    for (Eigen::Index i = 1; i < sv.size(); ++i) tail += sv(i) * sv(i);
    if (std::sqrt(tail) > 1e-10 * sv(0)) throw ConfigError("witness requires block-product target");
    return core_from_vector(svd.matrixU().col(0), bc, 1e-14);
}

std::vector<CoreState> factor_target(const CoreState& target, const Partition& P, double tol) {
    P.validate(target.modes);
    std::vector<CoreState> out;
    for (const auto& b : P.blocks) {
        std::vector<int> rest;
        for (int i = 0; i < target.modes; ++i)
            if (std::find(b.begin(), b.end(), i) == b.end()) rest.push_back(i);
        if (!rest.empty()) {
            // Schmidt rank across the cut
            std::vector<int> bc, rc;
            for (int i : b) bc.push_back(target.cutoffs[i]);
            for (int i : rest) rc.push_back(target.cutoffs[i]);
            CMat M = CMat::Zero(static_cast<Eigen::Index>(total_dim(bc)), static_cast<Eigen::Index>(total_dim(rc)));
            for (const auto& [idx, a] : target.coeffs) {
                Index kb, kr;
                for (int i : b) kb.push_back(idx[i]);
                for (int i : rest) kr.push_back(idx[i]);
                M(flat_index(kb, bc), flat_index(kr, rc)) = a;
            }
            Eigen::JacobiSVD<CMat> svd(M);
            auto sv = svd.singularValues();
            double tail = 0;
            for (Eigen::Index i = 1; i < sv.size(); ++i) tail += sv(i) * sv(i);
            if (std::sqrt(tail) > tol) throw ConfigError("witness requires block-product target");
        }
        out.push_back(restrict_modes(target, b));
    }
    return out;
}

std::vector<double> block_fidelities(const DensityOp& rho, const CoreState& target, const Partition& P) {
    if (rho.modes != target.modes) throw ConfigError("witness: state and target mode counts differ");
    auto f = factor_target(target, P);
    std::vector<double> F;
    for (std::size_t b = 0; b < P.blocks.size(); ++b) F.push_back(fidelity_pure(partial_trace(rho, P.blocks[b]), f[b]));
    return F;
}

double exact_witness(const DensityOp& rho, const CoreState& target, const Partition& P) {
    return witness_from_fidelities(block_fidelities(rho, target, P), P);
}

SandwichCheck check_sandwich(const DensityOp& rho, const CoreState& target, const Partition& P, double tol) {
    SandwichCheck c{};
    c.F = fidelity_pure(rho, target);
    c.W = exact_witness(rho, target, P);
    double nb = static_cast<double>(P.blocks.size());
    c.lower_slack = c.W - (1 - nb * (1 - c.F));
    c.upper_slack = c.F - c.W;
    try {
        c.W1 = exact_witness(rho, target, Partition::uniform(rho.modes, 1));
        c.ordering_slack = c.W - c.W1;
    } catch (const ConfigError&) {
        c.W1 = c.W;
        c.ordering_slack = 0;
    }
    c.lower_ok = c.lower_slack >= -tol;
    c.upper_ok = c.upper_slack >= -tol;
    c.ordering_ok = c.ordering_slack >= -tol;
    return c;
}

double doped_witness(const DensityOp& rho, const CoreState& phi, int m) {
    int kt = phi.modes;
    if (kt >= m) throw ConfigError("doped witness: the non-Gaussian block must be smaller than m");
    if (rho.modes != m) throw ConfigError("doped witness: state mode count differs from m");
    std::vector<int> head;
    for (int i = 0; i < kt; ++i) head.push_back(i);
    double w = 1 - (1 - fidelity_pure(partial_trace(rho, head), phi));
    CoreState vac = vacuum_core(1);
    for (int i = kt; i < m; ++i) w -= 1 - fidelity_pure(partial_trace(rho, {i}), vac);
    return w;
}

DopedSandwich doped_sandwich(const DensityOp& rho, const CoreState& phi, int m) {
    DopedSandwich d{};
    d.F = fidelity_pure(rho, tensor(phi, vacuum_core(m - phi.modes)));
    d.W = doped_witness(rho, phi, m);
    d.lower = 1 - (m - phi.modes + 1) * (1 - d.F);
    d.lower_slack = d.W - d.lower;
    d.upper_slack = d.F - d.W;
    return d;
}

}  // namespace cvv
