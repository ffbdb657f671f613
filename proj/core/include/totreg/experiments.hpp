#pragma once

#include "totreg/regression.hpp"
#include "totreg/solvers.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace totreg {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Flat view of the config: "section.key" -> value. Files use [section]
/// headers with key=value lines; command-line overrides use the same
/// section.key=value form.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_file(const std::filesystem::path& path);
void apply_override(ConfigMap& map, const std::string& assignment);

struct ExperimentConfig {
    std::string kind;                    // convergence|phase|rank-sweep|compare|ldp
    std::string id;                      // experiment_id column; defaults to kind
    std::string out_path = "out.csv";
    int seeds = 10;
    std::uint64_t base_seed = 0;
    int jobs = 1;
    double success_tol = 0.01;           // phase/rank-sweep success cutoff

    std::string model = "scalar-tensor"; // scalar-tensor|tensor-vector|matrix-trace|general
    std::vector<Index> dims;
    Index model_d = 0;                   // covariate modes for model=general
    std::vector<Index> r_star;
    double sigma = 0.0;
    std::vector<Index> n_grid;
    std::vector<std::vector<Index>> r_grid;

    std::vector<std::string> algorithms{"rgn"};
    SolverConfig solver;                 // input_rank is filled per grid cell
    bool hooi_inplace = false;

    std::vector<double> ldp_p_grid;
    int ldp_d = 3;
    double ldp_r_star = 1.0;
    int ldp_degree = 5;
    double ldp_delta = 0.5;
    double ldp_sigma_sq = 0.0;
    std::int64_t ldp_mc_samples = 200000;
    int ldp_profiles = 50;
};

/// Builds and validates a config from the parsed key-value map; throws
/// std::invalid_argument naming the offending field.
ExperimentConfig make_experiment_config(const ConfigMap& map);

/// Design geometry implied by the model name.
void design_geometry(const ExperimentConfig& cfg, DesignKind& kind, Index& d,
                     Index& m);

/// Replicate instance + spectral initialization for one grid cell;
/// deterministic in (base seed, n, rank tuple, seed index).
ProblemInstance make_instance(const ExperimentConfig& cfg, Index n,
                              int seed_index);
TuckerTensor make_initialization(const ExperimentConfig& cfg,
                                 const ProblemInstance& inst,
                                 const std::vector<Index>& r);

void run_convergence(const ExperimentConfig& cfg);
void run_phase(const ExperimentConfig& cfg);
void run_rank_sweep(const ExperimentConfig& cfg);
void run_compare(const ExperimentConfig& cfg);
void run_ldp_table(const ExperimentConfig& cfg);

/// Dispatches on cfg.kind.
void run_experiment(const ExperimentConfig& cfg);

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);
std::string rank_string(const std::vector<Index>& r);

} // namespace totreg
