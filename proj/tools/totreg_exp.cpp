// Experiment harness: generates synthetic low-Tucker-rank regression
// instances, runs the Riemannian solvers over (n, r, seed) grids, and emits
// CSV traces for external plotting.

#include <CLI11.hpp>

#include <totreg/experiments.hpp>
#include <totreg/io.hpp>
#include <totreg/regression.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::string model;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
    sub->add_option("--config", flags.config_path, "Config file path");
    sub->add_option("--out", flags.out_path, "Output CSV path");
    sub->add_option("--seed", flags.seed, "Base seed")->each([&](const std::string&) {
        flags.seed_set = true;
    });
    sub->add_option("--jobs", flags.jobs, "Concurrent grid cells (default $TOTREG_JOBS or 1)");
    sub->add_option("--model", flags.model,
                    "Model kind: scalar-tensor|tensor-vector|matrix-trace|general");
}

totreg::ConfigMap build_map(const CommonFlags& flags, const std::string& kind,
                            const std::vector<std::string>& extras) {
    totreg::ConfigMap map;
    if (!flags.config_path.empty())
        map = totreg::parse_config_file(flags.config_path);
    map["experiment.kind"] = kind;
    if (!flags.out_path.empty()) map["experiment.out"] = flags.out_path;
    if (flags.seed_set) map["experiment.base_seed"] = std::to_string(flags.seed);
    if (flags.jobs > 0) map["experiment.jobs"] = std::to_string(flags.jobs);
    if (!flags.model.empty()) map["model.kind"] = flags.model;
    for (const auto& extra : extras) {
        if (extra.rfind("--", 0) != 0 || extra.find('=') == std::string::npos)
            throw std::invalid_argument(
                "unrecognized argument (overrides look like --section.key=value): " +
                extra);
        totreg::apply_override(map, extra.substr(2));
    }
    return map;
}

std::vector<totreg::Index> parse_dims(const std::string& s) {
    std::istringstream is(s);
    std::vector<totreg::Index> out;
    long long v;
    char sep;
    while (is >> v) {
        out.push_back(v);
        is >> sep; // tolerate 'x' or ',' separators
    }
    if (out.empty()) throw std::invalid_argument("empty dimension list: " + s);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-Tucker-rank tensor regression experiment harness"};
    app.require_subcommand(1);

    const std::vector<std::string> grid_kinds = {"convergence", "phase",
                                                 "rank-sweep", "compare", "ldp"};
    std::vector<CommonFlags> flags(grid_kinds.size());
    std::vector<CLI::App*> subs;
    for (size_t i = 0; i < grid_kinds.size(); ++i) {
        CLI::App* sub = app.add_subcommand(grid_kinds[i],
                                           "Run the " + grid_kinds[i] + " experiment");
        add_common(sub, flags[i]);
        sub->allow_extras();
        subs.push_back(sub);
    }

    // gen-instance: write one synthetic instance to a directory.
    auto* gen = app.add_subcommand("gen-instance",
                                   "Generate a synthetic instance directory");
    std::string gen_model = "scalar-tensor", gen_dims, gen_rstar, gen_out = "instance";
    double gen_sigma = 0.0;
    long long gen_n = 0, gen_d = 0;
    std::uint64_t gen_seed = 0;
    gen->add_option("--model", gen_model, "Model kind")->capture_default_str();
    gen->add_option("--dims", gen_dims, "Ambient extents, e.g. 30x30x30")->required();
    gen->add_option("--r-star", gen_rstar, "True rank tuple, e.g. 3x3x3")->required();
    gen->add_option("--sigma", gen_sigma, "Noise level");
    gen->add_option("--n", gen_n, "Sample size")->required();
    gen->add_option("--d", gen_d, "Covariate modes (model=general only)");
    gen->add_option("--seed", gen_seed, "Seed");
    gen->add_option("--out", gen_out, "Output directory")->capture_default_str();

    // trip-estimate: sampled restricted-isometry diagnostic.
    auto* trip = app.add_subcommand("trip-estimate",
                                    "Estimate the restricted isometry constant of "
                                    "an instance's design by sampling");
    std::string trip_instance, trip_rank;
    int trip_trials = 200;
    std::uint64_t trip_seed = 0;
    trip->add_option("--instance", trip_instance, "Instance directory")->required();
    trip->add_option("--r", trip_rank, "Rank tuple, e.g. 2x2x2")->required();
    trip->add_option("--trials", trip_trials, "Sample count")->capture_default_str();
    trip->add_option("--seed", trip_seed, "Seed");

    CLI11_PARSE(app, argc, argv);

    try {
        for (size_t i = 0; i < grid_kinds.size(); ++i) {
            if (!subs[i]->parsed()) continue;
            auto map = build_map(flags[i], grid_kinds[i], subs[i]->remaining());
            totreg::ExperimentConfig cfg = totreg::make_experiment_config(map);
            totreg::run_experiment(cfg);
            return 0;
        }
        if (gen->parsed()) {
            auto dims = parse_dims(gen_dims);
            auto rstar = parse_dims(gen_rstar);
            totreg::DesignKind kind = totreg::design_kind_from_name(
                gen_model == "scalar-tensor"
                    ? "general"
                    : (gen_model == "tensor-vector" ? "vector" : gen_model));
            totreg::Index d, m;
            if (gen_model == "scalar-tensor") {
                d = static_cast<totreg::Index>(dims.size());
                m = 0;
            } else if (gen_model == "tensor-vector") {
                d = 1;
                m = static_cast<totreg::Index>(dims.size()) - 1;
            } else if (gen_model == "matrix-trace") {
                d = 2;
                m = 0;
            } else {
                d = gen_d;
                m = static_cast<totreg::Index>(dims.size()) - d;
            }
            auto inst = totreg::generate_gaussian_instance(dims, d, m, rstar,
                                                           gen_sigma, gen_n,
                                                           gen_seed, kind);
            totreg::save_instance(gen_out, inst);
            std::cout << "wrote instance to " << gen_out << "\n";
            return 0;
        }
        if (trip->parsed()) {
            auto inst = totreg::load_instance(trip_instance);
            auto r = parse_dims(trip_rank);
            std::vector<totreg::Index> trailing(
                inst.observations.shape().begin() + 1,
                inst.observations.shape().end());
            auto [lo, hi] = totreg::estimate_trip(inst.design, r, trip_trials,
                                                  trip_seed, trailing);
            const double rhat = std::max(1.0 - lo, hi - 1.0);
            std::printf("rmin=%.17g rmax=%.17g R=%.17g\n", lo, hi, rhat);
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
