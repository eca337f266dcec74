#include "cvverify/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cvv::io {

namespace {

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cfrom(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError(where + ": expected a number or [re, im]");
}

std::vector<cplx> cvec_from(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array");
    std::vector<cplx> v;
    for (const auto& e : j) v.push_back(cfrom(e, where));
    return v;
}

std::vector<int> ints_from(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of integers");
    std::vector<int> v;
    for (const auto& e : j) {
        if (!e.is_number_integer()) throw ConfigError(where + ": expected an array of integers");
        v.push_back(e.get<int>());
    }
    return v;
}

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

json partition_json(const Partition& P) {
    json a = json::array();
    for (const auto& b : P.blocks) {
        json blk = json::array();
        for (int m : b) blk.push_back(m + 1);
        a.push_back(blk);
    }
    return a;
}

std::string kind_name(SampleKind k) { return k == SampleKind::Homodyne ? "homodyne" : "heterodyne"; }

double parse_double(const std::string& s, std::size_t line) {
    const char* b = s.c_str();
    char* e = nullptr;
    double v = std::strtod(b, &e);
    if (e == b || *e != '\0') throw ConfigError("csv line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json to_json(const CoreState& s) {
    json e = json::array();
    for (const auto& [idx, a] : s.coeffs) {
        json row(idx);
        row.push_back(a.real());
        row.push_back(a.imag());
        e.push_back(row);
    }
    return {{"modes", s.modes}, {"cutoffs", s.cutoffs}, {"entries", e}};
}

json to_json(const DensityOp& r) {
    json e = json::array();
    for (std::size_t i = 0; i < r.dim(); ++i)
        for (std::size_t k = 0; k < r.dim(); ++k) {
            cplx v = r.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
            if (v == cplx(0.0)) continue;
            json row(multi_index(i, r.cutoffs));
            for (int n : multi_index(k, r.cutoffs)) row.push_back(n);
            row.push_back(v.real());
            row.push_back(v.imag());
            e.push_back(row);
        }
    return {{"modes", r.modes}, {"cutoffs", r.cutoffs}, {"entries", e}};
}

json to_json(const GaussianCircuit& c) {
    json beta = json::array(), xi = json::array(), U = json::array();
    for (auto b : c.beta) beta.push_back(cjson(b));
    for (auto x : c.xi) xi.push_back(cjson(x));
    for (Eigen::Index i = 0; i < c.U.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < c.U.cols(); ++k) row.push_back(cjson(c.U(i, k)));
        U.push_back(row);
    }
    return {{"beta", beta}, {"xi", xi}, {"U", U}, {"eta", c.eta}};
}

json to_json(const EstimatorConfig& c) { return {{"p", c.p}, {"tau", c.tau}, {"eta", c.eta}}; }

json to_json(const WitnessReport& w) {
    json cfgs = json::array();
    for (const auto& c : w.configs) cfgs.push_back(to_json(c));
    return {{"value", w.value},
            {"partition", partition_json(w.partition)},
            {"fidelity_terms", w.fidelity_terms},
            {"epsilon",
             {{"statistical", w.epsilon_statistical}, {"bias", w.epsilon_bias}, {"total", w.epsilon()}}},
            {"lambda", w.lambda},
            {"bias", w.bias},
            {"ranges", w.ranges},
            {"delta", w.delta},
            {"N", w.N},
            {"measurement", w.measurement},
            {"config", cfgs}};
}

json to_json(const Plan& p) {
    return {{"feasible", p.feasible},
            {"N", p.N},
            {"partition", partition_json(p.partition)},
            {"p", p.p},
            {"tau", p.tau},
            {"lambda", p.lambda},
            {"bias", p.bias},
            {"range", p.range},
            {"delta_i", p.delta_i},
            {"epsilon_total", p.epsilon_total},
            {"delta_total", p.delta_total},
            {"eta", p.eta},
            {"tightest_epsilon", p.tightest_epsilon},
            {"message", p.message}};
}

json to_json(const FidelityEstimate& f) {
    return {{"estimate", f.estimate}, {"N", f.N},           {"lambda", f.lambda},
            {"bias", f.bias},         {"delta", f.delta},   {"range", f.range},
            {"epsilon", f.epsilon()}, {"sample_variance", f.sample_variance},
            {"config", to_json(f.config)}};
}

CoreState core_from_json(const json& j) {
    const std::string W = "core state";
    // shorthand: {"fock": [1,0,1,0]}
    if (j.is_object() && j.contains("fock")) return fock_core(ints_from(j.at("fock"), W + ".fock"));
    int modes = need(j, "modes", W).get<int>();
    const json& e = need(j, "entries", W);
    if (!e.is_array()) throw ConfigError(W + ".entries: expected an array");
    AmplitudeMap m;
    for (const auto& row : e) {
        if (!row.is_array() || static_cast<int>(row.size()) != modes + 2)
            throw ConfigError(W + ".entries: each row is [n_1..n_m, re, im]");
        Index idx;
        for (int i = 0; i < modes; ++i) {
            if (!row[i].is_number_integer()) throw ConfigError(W + ".entries: photon numbers must be integers");
            idx.push_back(row[i].get<int>());
        }
        if (m.count(idx)) throw ConfigError(W + ".entries: duplicate index");
        m[idx] = cplx(row[modes].get<double>(), row[modes + 1].get<double>());
    }
    CoreState s = make_core_state(m);
    double n2 = 0;
    for (const auto& [idx, a] : m) n2 += std::norm(a);
    // keep the given amplitudes bit for bit when already normalised
    if (std::abs(n2 - 1.0) < 1e-12) {
        s.coeffs.clear();
        for (const auto& [idx, a] : m)
            if (a != cplx(0.0)) s.coeffs.emplace_back(idx, a);
    }
    if (j.contains("cutoffs")) {
        auto c = ints_from(j.at("cutoffs"), W + ".cutoffs");
        if (static_cast<int>(c.size()) != modes) throw ConfigError(W + ".cutoffs: one per mode");
        for (int i = 0; i < modes; ++i) {
            if (c[i] < s.cutoffs[i]) throw ConfigError(W + ".cutoffs: smaller than the support");
            s.cutoffs[i] = c[i];
        }
    }
    return s;
}

DensityOp density_from_json(const json& j) {
    const std::string W = "density";
    if (j.is_object() && j.contains("fock")) return density_from_pure(core_from_json(j));
    // pure core state given in its own entry format
    if (j.is_object() && j.contains("entries") && j.contains("modes") && j.at("entries").is_array() &&
        !j.at("entries").empty() && j.at("entries")[0].is_array() &&
        static_cast<int>(j.at("entries")[0].size()) == j.at("modes").get<int>() + 2) {
        CoreState c = core_from_json(j);
        return density_from_vector(c.dense(), c.cutoffs);
    }
    int modes = need(j, "modes", W).get<int>();
    auto cut = ints_from(need(j, "cutoffs", W), W + ".cutoffs");
    if (static_cast<int>(cut.size()) != modes || modes <= 0) throw ConfigError(W + ".cutoffs: one per mode");
    for (int c : cut)
        if (c < 1) throw ConfigError(W + ".cutoffs: must be >= 1");
    std::size_t d = total_dim(cut);
    CMat M = CMat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const json& e = need(j, "entries", W);
    if (!e.is_array()) throw ConfigError(W + ".entries: expected an array");
    for (const auto& row : e) {
        if (!row.is_array() || static_cast<int>(row.size()) != 2 * modes + 2)
            throw ConfigError(W + ".entries: each row is [row index.., column index.., re, im]");
        Index a, b;
        for (int i = 0; i < modes; ++i) {
            a.push_back(row[i].get<int>());
            b.push_back(row[modes + i].get<int>());
        }
        for (int i = 0; i < modes; ++i)
            if (a[i] < 0 || b[i] < 0 || a[i] >= cut[i] || b[i] >= cut[i])
                throw ConfigError(W + ".entries: index outside cutoffs");
        M(static_cast<Eigen::Index>(flat_index(a, cut)), static_cast<Eigen::Index>(flat_index(b, cut))) =
            cplx(row[2 * modes].get<double>(), row[2 * modes + 1].get<double>());
    }
    return make_density(M, cut);
}

GaussianCircuit circuit_from_json(const json& j, int modes_hint) {
    const std::string W = "circuit";
    if (!j.is_object()) throw ConfigError(W + ": expected an object");
    int m = modes_hint;
    if (j.contains("beta")) m = static_cast<int>(j.at("beta").size());
    else if (j.contains("U")) m = static_cast<int>(j.at("U").size());
    if (m <= 0) throw ConfigError(W + ": cannot infer the mode count");
    GaussianCircuit c = GaussianCircuit::identity(m);
    if (j.contains("beta")) c.beta = cvec_from(j.at("beta"), W + ".beta");
    if (j.contains("xi")) c.xi = cvec_from(j.at("xi"), W + ".xi");
    if (j.contains("U")) {
        const json& U = j.at("U");
        if (!U.is_array() || static_cast<int>(U.size()) != m) throw ConfigError(W + ".U: expected m rows");
        for (int r = 0; r < m; ++r) {
            if (!U[r].is_array() || static_cast<int>(U[r].size()) != m) throw ConfigError(W + ".U: expected m columns");
            for (int k = 0; k < m; ++k) c.U(r, k) = cfrom(U[r][k], W + ".U");
        }
    }
    if (j.contains("eta")) {
        const json& e = j.at("eta");
        if (e.is_number()) c.eta.assign(m, e.get<double>());
        else {
            if (!e.is_array()) throw ConfigError(W + ".eta: number or array");
            c.eta.clear();
            for (const auto& v : e) c.eta.push_back(v.get<double>());
        }
    }
    c.validate();
    return c;
}

std::string batch_to_csv(const SampleBatch& b) {
    b.validate();
    std::ostringstream os;
    os << "# kind=" << kind_name(b.kind) << '\n';
    os << "# eta=" << fmt_double(b.eta) << '\n';
    os << "# seed=" << b.seed << '\n';
    os << "# policy=" << (b.policy == ThetaPolicy::Uniform ? "uniform" : "fixed") << '\n';
    os << "# rescaled=" << (b.rescaled ? 1 : 0) << '\n';
    if (!b.xi.empty()) {
        os << "# xi=";
        for (std::size_t i = 0; i < b.xi.size(); ++i)
            os << (i ? ";" : "") << fmt_double(b.xi[i].real()) << ':' << fmt_double(b.xi[i].imag());
        os << '\n';
    }
    os << "shot";
    if (b.kind == SampleKind::Homodyne) {
        os << ",theta";
        for (int m = 1; m <= b.modes; ++m) os << ",x" << m;
    } else {
        for (int m = 1; m <= b.modes; ++m) os << ",re" << m << ",im" << m;
    }
    os << '\n';
    std::size_t n = b.count();
    for (std::size_t i = 0; i < n; ++i) {
        auto r = static_cast<Eigen::Index>(i);
        os << i;
        if (b.kind == SampleKind::Homodyne) {
            os << ',' << fmt_double(b.theta[i]);
            for (int m = 0; m < b.modes; ++m) os << ',' << fmt_double(b.x(r, m));
        } else {
            for (int m = 0; m < b.modes; ++m)
                os << ',' << fmt_double(b.alpha(r, m).real()) << ',' << fmt_double(b.alpha(r, m).imag());
        }
        os << '\n';
    }
    return os.str();
}

SampleBatch batch_from_csv(const std::string& text) {
    SampleBatch b;
    std::istringstream is(text);
    std::string line;
    std::size_t ln = 0;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string kv = line.substr(1);
            while (!kv.empty() && kv[0] == ' ') kv.erase(0, 1);
            auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
            if (k == "eta") b.eta = parse_double(v, ln);
            else if (k == "seed") b.seed = std::stoull(v);
            else if (k == "policy") b.policy = v == "fixed" ? ThetaPolicy::Fixed : ThetaPolicy::Uniform;
            else if (k == "rescaled") b.rescaled = v == "1";
            else if (k == "xi") {
                for (const auto& part : split(v, ';')) {
                    auto c = part.find(':');
                    if (c == std::string::npos) throw ConfigError("csv: xi entries are re:im");
                    b.xi.emplace_back(parse_double(part.substr(0, c), ln), parse_double(part.substr(c + 1), ln));
                }
            }
            continue;
        }
        auto cells = split(line, ',');
        if (!have_header) {
            if (cells.empty() || cells[0] != "shot") throw ConfigError("csv: header row must start with 'shot'");
            if (cells.size() >= 2 && cells[1] == "theta") {
                b.kind = SampleKind::Homodyne;
                b.modes = static_cast<int>(cells.size()) - 2;
            } else {
                b.kind = SampleKind::Heterodyne;
                if ((cells.size() - 1) % 2 != 0) throw ConfigError("csv: heterodyne header needs re/im pairs");
                b.modes = static_cast<int>(cells.size() - 1) / 2;
            }
            if (b.modes <= 0) throw ConfigError("csv: no mode columns");
            have_header = true;
            continue;
        }
        std::size_t want = b.kind == SampleKind::Homodyne ? b.modes + 2 : 2 * b.modes + 1;
        if (cells.size() != want)
            throw ConfigError("csv line " + std::to_string(ln) + ": expected " + std::to_string(want) + " columns");
        std::vector<double> r;
        for (std::size_t i = 1; i < cells.size(); ++i) r.push_back(parse_double(cells[i], ln));
        rows.push_back(std::move(r));
    }
    if (!have_header) throw ConfigError("csv: missing header row");
    auto n = static_cast<Eigen::Index>(rows.size());
    if (b.kind == SampleKind::Homodyne) {
        b.x = RMat(n, b.modes);
        for (Eigen::Index i = 0; i < n; ++i) {
            b.theta.push_back(rows[i][0]);
            for (int m = 0; m < b.modes; ++m) b.x(i, m) = rows[i][m + 1];
        }
        b.xi.clear();
    } else {
        b.alpha = CMat(n, b.modes);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int m = 0; m < b.modes; ++m) b.alpha(i, m) = cplx(rows[i][2 * m], rows[i][2 * m + 1]);
    }
    b.validate();
    return b;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << text;
    if (!f) throw ConfigError("write failed for '" + path + "'");
}

json read_json(const std::string& path) {
    std::string t = read_file(path);
    try {
        return json::parse(t);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace cvv::io
