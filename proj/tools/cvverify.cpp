// command line front end
#include "cvverify/experiments.hpp"
#include "cvverify/io.hpp"
#include "cvverify/oracle.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace cvv;
using io::json;

namespace {

struct Opts {
    std::uint64_t seed = 7;
    std::size_t samples = 10000;
    int cutoff = 0;
    double eta = 1.0;
    std::string eta_grid;
    double tau = 0.3;
    int p = 0;
    int k = 0;
    std::string partition;
    double epsilon = 0.1;
    double delta = 0.1;
    std::string out;

    std::string state, circuit, target, samples_file, measurement = "heterodyne", protocol = "4", experiment;
    bool homodyne_plan = false;
    double eps_v = 0.1;
    int family = 20;
    std::size_t sampled = 0;
    bool quick = false;
    bool seed_given = false;
};

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) std::cout << text;
    else io::write_file(path, text);
}

std::vector<double> parse_grid(const std::string& s) {
    // a:b:n
    auto c1 = s.find(':'), c2 = s.rfind(':');
    if (c1 == std::string::npos || c1 == c2) throw ConfigError("--eta-grid: expected a:b:n");
    double a = std::stod(s.substr(0, c1)), b = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
    int n = std::stoi(s.substr(c2 + 1));
    if (n < 1) throw ConfigError("--eta-grid: n must be >= 1");
    return n == 1 ? std::vector<double>{a} : linspace(a, b, n);
}

Partition partition_for(const Opts& o, int m) {
    if (!o.partition.empty()) return Partition::parse(o.partition, m);
    return Partition::uniform(m, o.k > 0 ? o.k : 1);
}

GaussianCircuit load_circuit(const Opts& o, int m) {
    if (o.circuit.empty()) return GaussianCircuit::identity(m);
    GaussianCircuit c = io::circuit_from_json(io::read_json(o.circuit), m);
    if (c.modes() != m) throw ConfigError("circuit: mode count differs from the samples");
    return c;
}

int run_simulate(const Opts& o) {
    if (o.state.empty()) throw ConfigError("simulate: --state is required");
    DensityOp rho = io::density_from_json(io::read_json(o.state));
    if (!o.circuit.empty()) {
        GaussianCircuit c = io::circuit_from_json(io::read_json(o.circuit), rho.modes);
        rho = o.cutoff > 0 ? apply_circuit(rho, c, std::vector<int>(rho.modes, o.cutoff)) : apply_circuit(rho, c);
    }
    SampleBatch b;
    if (o.measurement == "homodyne")
        b = sample_parallel_homodyne(rho, o.samples, o.seed, ThetaPolicy::Uniform, 0.0, o.eta);
    else if (o.measurement == "heterodyne")
        b = sample_heterodyne(rho, o.samples, o.seed, {}, o.eta);
    else
        throw ConfigError("--measurement must be homodyne or heterodyne");
    emit(io::batch_to_csv(b), o.out);
    return 0;
}

int run_estimate(const Opts& o) {
    if (o.samples_file.empty()) throw ConfigError("estimate: --samples is required");
    if (o.target.empty()) throw ConfigError("estimate: --target is required");
    SampleBatch b = io::batch_from_csv(io::read_file(o.samples_file));
    CoreState target = io::core_from_json(io::read_json(o.target));
    int pp = o.p > 0 ? o.p : 2;
    json j;
    if (o.protocol == "1") {
        j = io::to_json(protocol1(b, target, o.epsilon));
    } else if (o.protocol == "2") {
        Partition P = Partition::uniform(b.modes, 1);
        GaussianCircuit c = load_circuit(o, b.modes);
        j = io::to_json(protocol2(b, factor_target(target, P), HomodyneRule::from_circuit(c), o.epsilon));
    } else if (o.protocol == "3") {
        EstimatorConfig cfg{std::vector<int>(target.modes, pp), o.tau, 1.0};
        j = io::to_json(protocol3(b, target, cfg, o.delta));
    } else if (o.protocol == "4") {
        Partition P = partition_for(o, b.modes);
        std::vector<CoreState> targets = factor_target(target, P);
        std::vector<EstimatorConfig> cfgs;
        for (const auto& blk : P.blocks) cfgs.push_back({std::vector<int>(blk.size(), pp), o.tau, 1.0});
        j = io::to_json(protocol4(b, targets, load_circuit(o, b.modes), P, cfgs, o.delta));
    } else if (o.protocol == "doped") {
        EstimatorConfig bc{std::vector<int>(target.modes, pp), o.tau, 1.0}, vc{{pp}, o.tau, 1.0};
        j = io::to_json(protocol_doped(b, target, load_circuit(o, b.modes), b.modes, bc, vc, o.delta));
    } else {
        throw ConfigError("--protocol must be 1, 2, 3, 4 or doped");
    }
    emit(j.dump(2) + "\n", o.out);
    return 0;
}

int run_plan(const Opts& o) {
    if (o.target.empty()) throw ConfigError("plan: --target is required");
    CoreState target = io::core_from_json(io::read_json(o.target));
    Partition P = partition_for(o, target.modes);
    PlanOptions po;
    po.homodyne = o.homodyne_plan;
    po.fixed_p = o.p;
    Plan pl = plan_samples(factor_target(target, P), P, o.epsilon, o.delta, o.eta, po);
    emit(io::to_json(pl).dump(2) + "\n", o.out);
    return pl.feasible ? 0 : 3;
}

int run_reproduce(const Opts& o) {
    ExperimentConfig cfg;
    cfg.id = o.experiment;
    if (!o.eta_grid.empty()) cfg.eta_grid = parse_grid(o.eta_grid);
    if (o.seed_given) cfg.seed = o.seed;
    if (o.cutoff > 0) cfg.cutoff = o.cutoff;
    cfg.eps_v = o.eps_v;
    cfg.family = o.family;
    cfg.sampled = o.sampled;
    cfg.tau = o.tau;
    if (o.p > 0) cfg.p = o.p;
    cfg.delta = o.delta;
    Curves c = run_experiment(cfg);
    std::string dir = o.out.empty() ? "." : o.out;
    std::filesystem::create_directories(dir);
    io::write_file(dir + "/" + cfg.id + ".csv", curves_csv(c));
    io::write_file(dir + "/" + cfg.id + ".svg", curves_svg(c));
    std::cout << c.title << "\n";
    for (std::size_t k = 0; k < c.names.size(); ++k) {
        if (c.names[k].find("_eps") != std::string::npos) continue;
        double z = zero_crossing(c.grid, c.cols[k]);
        std::cout << "  " << c.names[k] << ": first eta with value >= 0 ";
        if (std::isnan(z)) std::cout << "none\n";
        else std::cout << io::fmt_double(std::round(z * 1e6) / 1e6) << "\n";
    }
    std::cout << "wrote " << dir << "/" << cfg.id << ".csv and .svg\n";
    return 0;
}

int run_oracle_report(const Opts& o) {
    oracle::ReportOptions ro;
    if (o.seed_given) ro.seed = o.seed;
    if (o.quick) {
        ro.bias_states = 6;
        ro.sandwich_states = 20;
        ro.range_cores = 6;
        ro.range_points = 5000;
    }
    oracle::Report rep = oracle::empirical_vs_bound_report(ro);
    std::cout << rep.table();
    if (!o.out.empty()) io::write_file(o.out, rep.json() + "\n");
    return rep.all_clean() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cvverify: fidelity witnesses and sample planning for continuous-variable states"};
    app.require_subcommand(1);
    Opts o;

    auto common = [&](CLI::App* s) {
        s->add_option("--seed", o.seed, "random seed");
        s->add_option("--out", o.out, "output file (directory for reproduce)");
    };

    auto* sim = app.add_subcommand("simulate", "sample homodyne or heterodyne outcomes to CSV");
    common(sim);
    sim->add_option("--state", o.state, "density or core state JSON")->required();
    sim->add_option("--circuit", o.circuit, "Gaussian circuit JSON applied before measuring");
    sim->add_option("--measurement", o.measurement, "homodyne | heterodyne");
    sim->add_option("--samples", o.samples, "number of shots");
    sim->add_option("--eta", o.eta, "detector efficiency");
    sim->add_option("--cutoff", o.cutoff, "working cutoff per mode for the circuit");

    auto* est = app.add_subcommand("estimate", "run a protocol on a CSV sample file");
    common(est);
    est->add_option("--protocol", o.protocol, "1 | 2 | 3 | 4 | doped");
    est->add_option("--samples", o.samples_file, "CSV sample file")->required();
    est->add_option("--target", o.target, "target core state JSON")->required();
    est->add_option("--circuit", o.circuit, "circuit JSON to back-propagate");
    est->add_option("--partition", o.partition, "blocks, e.g. \"1,2|3,4\"");
    est->add_option("--k", o.k, "uniform block size");
    est->add_option("--p", o.p, "estimator order per mode");
    est->add_option("--tau", o.tau, "estimator parameter tau");
    est->add_option("--epsilon", o.epsilon, "accuracy (protocols 1, 2)");
    est->add_option("--delta", o.delta, "failure probability (protocols 3, 4, doped)");

    auto* pl = app.add_subcommand("plan", "choose N, p and tau for a target");
    common(pl);
    pl->add_option("--target", o.target, "target core state JSON")->required();
    pl->add_option("--partition", o.partition, "blocks, e.g. \"1,2|3,4\"");
    pl->add_option("--k", o.k, "uniform block size");
    pl->add_option("--p", o.p, "pin p on every mode");
    pl->add_option("--epsilon", o.epsilon, "total accuracy");
    pl->add_option("--delta", o.delta, "total failure probability");
    pl->add_option("--eta", o.eta, "detector efficiency");
    pl->add_flag("--homodyne", o.homodyne_plan, "plan for homodyne detection");

    auto* rep = app.add_subcommand("reproduce", "recompute an example's curves to CSV and SVG");
    common(rep);
    rep->add_option("experiment", o.experiment, "example1 | example2 | example3")->required();
    rep->add_option("--eta-grid", o.eta_grid, "a:b:n");
    rep->add_option("--cutoff", o.cutoff, "per mode cutoff (example1)");
    rep->add_option("--eps-v", o.eps_v, "interferometer perturbation strength (example1)");
    rep->add_option("--family", o.family, "number of perturbed interferometers (example1)");
    rep->add_option("--samples", o.sampled, "also run protocol 4 with this many shots (examples 2, 3)");
    rep->add_option("--tau", o.tau, "estimator tau for --samples");
    rep->add_option("--p", o.p, "estimator order for --samples");
    rep->add_option("--delta", o.delta, "failure probability for --samples");

    auto* orc = app.add_subcommand("oracle-report", "sweep bounds against brute-force references");
    common(orc);
    orc->add_flag("--quick", o.quick, "small populations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    for (auto* s : {rep, orc})
        if (*s && s->count("--seed") > 0) o.seed_given = true;

    try {
        if (*sim) return run_simulate(o);
        if (*est) return run_estimate(o);
        if (*pl) return run_plan(o);
        if (*rep) return run_reproduce(o);
        if (*orc) return run_oracle_report(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error (json): " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
