#include "totreg/experiments.hpp"

#include "totreg/init.hpp"
#include "totreg/ldp.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace totreg {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] void bad_field(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config field '" + key + "': " + why);
}

std::string get_or(const ConfigMap& map, const std::string& key,
                   const std::string& fallback) {
    auto it = map.find(key);
    return it == map.end() ? fallback : it->second;
}

bool has(const ConfigMap& map, const std::string& key) {
    return map.count(key) > 0;
}

long long parse_int(const ConfigMap& map, const std::string& key, long long fb) {
    auto it = map.find(key);
    if (it == map.end()) return fb;
    try {
        size_t pos = 0;
        long long v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        bad_field(key, "not an integer: " + it->second);
    }
}

double parse_real(const ConfigMap& map, const std::string& key, double fb) {
    auto it = map.find(key);
    if (it == map.end()) return fb;
    try {
        size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        bad_field(key, "not a number: " + it->second);
    }
}

// Accepts space-, comma-, or x-separated integers ("2 2 2", "2x2x2").
std::vector<Index> parse_index_list(const std::string& key, const std::string& v) {
    std::string norm = v;
    for (char& c : norm)
        if (c == 'x' || c == ',') c = ' ';
    std::vector<Index> out;
    for (const auto& tok : split_ws(norm)) {
        try {
            size_t pos = 0;
            out.push_back(static_cast<Index>(std::stoll(tok, &pos)));
            if (pos != tok.size()) throw std::invalid_argument("");
        } catch (...) {
            bad_field(key, "not an integer list: " + v);
        }
    }
    return out;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& tok : split_ws(v)) {
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            bad_field(key, "not a number list: " + v);
        }
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

fs::path with_suffix(const fs::path& out, const std::string& tag) {
    fs::path p = out;
    p.replace_extension("");
    p += "." + tag + ".csv";
    return p;
}

} // namespace

ConfigMap parse_config_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path.string());
    ConfigMap map;
    std::string line, section;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line without '=': " + line);
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        map[key] = trim(line.substr(eq + 1));
    }
    return map;
}

void apply_override(ConfigMap& map, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like section.key=value: " +
                                    assignment);
    map[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::Rgd: return "rgd";
    case Algorithm::Rgn: return "rgn";
    case Algorithm::Pgd: return "pgd";
    case Algorithm::FactoredGd: return "factored-gd";
    }
    return "rgn";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "rgd") return Algorithm::Rgd;
    if (name == "rgn") return Algorithm::Rgn;
    if (name == "pgd") return Algorithm::Pgd;
    if (name == "factored-gd" || name == "gd") return Algorithm::FactoredGd;
    throw std::invalid_argument("unknown algorithm: " + name);
}

std::string rank_string(const std::vector<Index>& r) {
    std::string out;
    for (size_t k = 0; k < r.size(); ++k) {
        if (k) out += "x";
        out += std::to_string(r[k]);
    }
    return out;
}

ExperimentConfig make_experiment_config(const ConfigMap& map) {
    ExperimentConfig cfg;
    cfg.kind = get_or(map, "experiment.kind", "");
    if (cfg.kind != "convergence" && cfg.kind != "phase" &&
        cfg.kind != "rank-sweep" && cfg.kind != "compare" && cfg.kind != "ldp")
        bad_field("experiment.kind",
                  "must be one of convergence|phase|rank-sweep|compare|ldp, got '" +
                      cfg.kind + "'");
    cfg.id = get_or(map, "experiment.id", cfg.kind);
    cfg.out_path = get_or(map, "experiment.out", "out.csv");
    cfg.seeds = static_cast<int>(parse_int(map, "experiment.seeds", 10));
    if (cfg.seeds < 1) bad_field("experiment.seeds", "must be >= 1");
    cfg.base_seed =
        static_cast<std::uint64_t>(parse_int(map, "experiment.base_seed", 0));
    cfg.success_tol = parse_real(map, "experiment.success_tol", 0.01);

    if (has(map, "experiment.jobs")) {
        cfg.jobs = static_cast<int>(parse_int(map, "experiment.jobs", 1));
    } else if (const char* env = std::getenv("TOTREG_JOBS")) {
        cfg.jobs = std::max(1, std::atoi(env));
    } else {
        cfg.jobs = 1;
    }
    if (cfg.jobs < 1) bad_field("experiment.jobs", "must be >= 1");

    cfg.model = get_or(map, "model.kind", "scalar-tensor");
    if (cfg.model != "scalar-tensor" && cfg.model != "tensor-vector" &&
        cfg.model != "matrix-trace" && cfg.model != "general")
        bad_field("model.kind", "unknown model '" + cfg.model + "'");
    if (has(map, "model.dims"))
        cfg.dims = parse_index_list("model.dims", map.at("model.dims"));
    cfg.model_d = parse_int(map, "model.d", 0);
    if (has(map, "model.r_star"))
        cfg.r_star = parse_index_list("model.r_star", map.at("model.r_star"));
    cfg.sigma = parse_real(map, "model.sigma", 0.0);
    if (has(map, "model.n"))
        cfg.n_grid = parse_index_list("model.n", map.at("model.n"));
    if (has(map, "model.r")) {
        for (const auto& tup : split_on(map.at("model.r"), ';')) {
            auto r = parse_index_list("model.r", tup);
            if (!r.empty()) cfg.r_grid.push_back(std::move(r));
        }
    }

    if (has(map, "solver.algorithms")) {
        cfg.algorithms = split_ws(map.at("solver.algorithms"));
        for (const auto& a : cfg.algorithms) algorithm_from_name(a); // validate
    } else if (cfg.kind == "compare") {
        cfg.algorithms = {"rgn", "rgd", "pgd", "factored-gd"};
    }
    cfg.solver.max_iters = static_cast<int>(parse_int(map, "solver.max_iters", 300));
    cfg.solver.tol_rel_rmse = parse_real(map, "solver.tol", 1e-13);
    cfg.solver.ridge_eps = parse_real(map, "solver.ridge_eps", 1e-12);
    if (has(map, "solver.baseline_stepsizes"))
        cfg.solver.baseline_stepsizes = parse_real_list(
            "solver.baseline_stepsizes", map.at("solver.baseline_stepsizes"));
    const std::string retr = get_or(map, "solver.retraction",
                                    cfg.model == "matrix-trace" ? "matrix-svd"
                                                                : "sthosvd");
    if (retr == "thosvd") cfg.solver.retraction = Retraction::THosvd;
    else if (retr == "sthosvd") cfg.solver.retraction = Retraction::STHosvd;
    else if (retr == "matrix-svd") cfg.solver.retraction = Retraction::MatrixSvd;
    else bad_field("solver.retraction", "unknown retraction '" + retr + "'");
    cfg.hooi_inplace = parse_int(map, "solver.hooi_inplace", 0) != 0;

    if (has(map, "ldp.p_grid"))
        cfg.ldp_p_grid = parse_real_list("ldp.p_grid", map.at("ldp.p_grid"));
    cfg.ldp_d = static_cast<int>(parse_int(map, "ldp.d", 3));
    cfg.ldp_r_star = parse_real(map, "ldp.r_star", 1.0);
    cfg.ldp_degree = static_cast<int>(parse_int(map, "ldp.degree", 5));
    cfg.ldp_delta = parse_real(map, "ldp.delta", 0.5);
    cfg.ldp_sigma_sq = parse_real(map, "ldp.sigma_sq", 0.0);
    cfg.ldp_mc_samples = parse_int(map, "ldp.mc_samples", 200000);
    cfg.ldp_profiles = static_cast<int>(parse_int(map, "ldp.profiles", 50));

    if (cfg.kind != "ldp") {
        if (cfg.dims.empty()) bad_field("model.dims", "required for solver experiments");
        if (cfg.r_star.size() != cfg.dims.size())
            bad_field("model.r_star", "must list one rank per mode");
        if (cfg.n_grid.empty()) bad_field("model.n", "at least one sample size required");
        if (cfg.r_grid.empty()) bad_field("model.r", "at least one rank tuple required");
        for (const auto& r : cfg.r_grid)
            if (r.size() != cfg.dims.size())
                bad_field("model.r", "rank tuple " + rank_string(r) +
                                         " does not match the mode count");
        if (cfg.algorithms.empty())
            bad_field("solver.algorithms", "at least one algorithm required");
    } else if (cfg.ldp_p_grid.empty()) {
        bad_field("ldp.p_grid", "at least one dimension required");
    }
    return cfg;
}

void design_geometry(const ExperimentConfig& cfg, DesignKind& kind, Index& d,
                     Index& m) {
    const Index order = static_cast<Index>(cfg.dims.size());
    if (cfg.model == "scalar-tensor") {
        kind = DesignKind::General;
        d = order;
        m = 0;
    } else if (cfg.model == "tensor-vector") {
        kind = DesignKind::Vector;
        d = 1;
        m = order - 1;
        if (m < 1) bad_field("model.dims", "tensor-vector needs at least 2 modes");
    } else if (cfg.model == "matrix-trace") {
        kind = DesignKind::MatrixTrace;
        d = 2;
        m = 0;
        if (order != 2) bad_field("model.dims", "matrix-trace needs exactly 2 modes");
    } else {
        kind = DesignKind::General;
        d = cfg.model_d;
        if (d < 1 || d > order)
            bad_field("model.d", "must satisfy 1 <= d <= number of modes");
        m = order - d;
    }
}

ProblemInstance make_instance(const ExperimentConfig& cfg, Index n,
                              int seed_index) {
    DesignKind kind;
    Index d, m;
    design_geometry(cfg, kind, d, m);
    const std::uint64_t seed = combine_seed(
        cfg.base_seed,
        {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(seed_index)});
    return generate_gaussian_instance(cfg.dims, d, m, cfg.r_star, cfg.sigma, n,
                                      seed, kind);
}

TuckerTensor make_initialization(const ExperimentConfig& cfg,
                                 const ProblemInstance& inst,
                                 const std::vector<Index>& r) {
    return initialize(inst, r, cfg.hooi_inplace);
}

namespace {

struct CellResult {
    std::vector<std::string> rows;
    std::vector<std::string> meta;
};

/// Runs the tasks on a bounded pool; results land in input order.
std::vector<CellResult> run_cells(int jobs,
                                  std::vector<std::function<CellResult()>> tasks) {
    std::vector<CellResult> results(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            results[i] = tasks[i]();
        }
    };
    const int workers = std::min<int>(jobs, static_cast<int>(tasks.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return results;
}

std::vector<std::string> config_metadata(const ExperimentConfig& cfg) {
    std::vector<std::string> meta;
    auto add = [&](const std::string& k, const std::string& v) {
        meta.push_back(k + "=" + v);
    };
    add("library_version", kLibraryVersion);
    add("experiment.kind", cfg.kind);
    add("experiment.id", cfg.id);
    add("experiment.seeds", std::to_string(cfg.seeds));
    add("experiment.base_seed", std::to_string(cfg.base_seed));
    add("experiment.success_tol", fmt(cfg.success_tol));
    add("model.kind", cfg.model);
    std::string dims;
    for (size_t k = 0; k < cfg.dims.size(); ++k)
        dims += (k ? " " : "") + std::to_string(cfg.dims[k]);
    add("model.dims", dims);
    add("model.r_star", rank_string(cfg.r_star));
    add("model.sigma", fmt(cfg.sigma));
    std::string ns;
    for (size_t k = 0; k < cfg.n_grid.size(); ++k)
        ns += (k ? " " : "") + std::to_string(cfg.n_grid[k]);
    add("model.n", ns);
    std::string rs;
    for (size_t k = 0; k < cfg.r_grid.size(); ++k)
        rs += (k ? ";" : "") + rank_string(cfg.r_grid[k]);
    add("model.r", rs);
    std::string algs;
    for (size_t k = 0; k < cfg.algorithms.size(); ++k)
        algs += (k ? " " : "") + cfg.algorithms[k];
    add("solver.algorithms", algs);
    add("solver.max_iters", std::to_string(cfg.solver.max_iters));
    add("solver.tol", fmt(cfg.solver.tol_rel_rmse));
    add("solver.ridge_eps", fmt(cfg.solver.ridge_eps));
    add("solver.hooi_inplace", cfg.hooi_inplace ? "1" : "0");
    if (cfg.kind == "ldp") {
        std::string ps;
        for (size_t k = 0; k < cfg.ldp_p_grid.size(); ++k)
            ps += (k ? " " : "") + fmt(cfg.ldp_p_grid[k]);
        add("ldp.p_grid", ps);
        add("ldp.d", std::to_string(cfg.ldp_d));
        add("ldp.r_star", fmt(cfg.ldp_r_star));
        add("ldp.degree", std::to_string(cfg.ldp_degree));
        add("ldp.delta", fmt(cfg.ldp_delta));
        add("ldp.sigma_sq", fmt(cfg.ldp_sigma_sq));
        add("ldp.mc_samples", std::to_string(cfg.ldp_mc_samples));
        add("ldp.profiles", std::to_string(cfg.ldp_profiles));
    }
    return meta;
}

constexpr const char* kTraceHeader =
    "experiment_id,model,algorithm,seed,n,r,r_star,sigma,iter,rel_rmse,loss,"
    "stepsize,elapsed_ms";

void write_csv(const fs::path& path, const std::vector<std::string>& meta,
               const std::string& header, const std::vector<std::string>& rows) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file: " + path.string());
    for (const auto& m : meta) os << "# " << m << '\n';
    os << header << '\n';
    for (const auto& r : rows) os << r << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string trace_row(const ExperimentConfig& cfg, const std::string& alg,
                      int seed, Index n, const std::vector<Index>& r,
                      const IterRecord& rec) {
    std::string out;
    out += cfg.id;
    out += "," + cfg.model;
    out += "," + alg;
    out += "," + std::to_string(seed);
    out += "," + std::to_string(n);
    out += "," + rank_string(r);
    out += "," + rank_string(cfg.r_star);
    out += "," + fmt(cfg.sigma);
    out += "," + std::to_string(rec.iter);
    out += "," + fmt(rec.rel_rmse);
    out += "," + fmt(rec.loss);
    out += "," + fmt(rec.stepsize);
    out += "," + fmt(static_cast<double>(rec.elapsed_ns) / 1e6);
    return out;
}

SolverConfig cell_solver_config(const ExperimentConfig& cfg,
                                const std::string& alg,
                                const std::vector<Index>& r) {
    SolverConfig sc = cfg.solver;
    sc.algorithm = algorithm_from_name(alg);
    sc.input_rank = r;
    return sc;
}

struct CellOutcome {
    std::vector<IterRecord> records;
    RunTrace trace;
};

/// One full replicate: generate, initialize, solve.
RunTrace run_replicate(const ExperimentConfig& cfg, const std::string& alg,
                       Index n, const std::vector<Index>& r, int seed) {
    ProblemInstance inst = make_instance(cfg, n, seed);
    TuckerTensor x0 = make_initialization(cfg, inst, r);
    auto [xt, trace] = solve(inst, cell_solver_config(cfg, alg, r), x0);
    (void)xt;
    return trace;
}

/// Shared grid runner emitting final-iterate rows plus per-cell success
/// summaries; rank-sweep additionally reports the minimal successful n.
void run_grid(const ExperimentConfig& cfg, bool with_min_rows) {
    struct Cell {
        std::string alg;
        std::vector<Index> r;
        Index n;
    };
    std::vector<Cell> cells;
    for (const auto& alg : cfg.algorithms)
        for (const auto& r : cfg.r_grid)
            for (Index n : cfg.n_grid) cells.push_back({alg, r, n});

    std::vector<std::function<CellResult()>> tasks;
    for (const auto& cell : cells) {
        tasks.push_back([&cfg, cell] {
            CellResult res;
            for (int seed = 0; seed < cfg.seeds; ++seed) {
                RunTrace trace = run_replicate(cfg, cell.alg, cell.n, cell.r, seed);
                if (!trace.records.empty())
                    res.rows.push_back(trace_row(cfg, cell.alg, seed, cell.n,
                                                 cell.r, trace.records.back()));
            }
            return res;
        });
    }
    auto results = run_cells(cfg.jobs, std::move(tasks));

    std::vector<std::string> rows;
    std::vector<std::string> summary;
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<Index, double>>>
        per_ar; // (alg, rank string) -> (n, success rate) in grid order
    for (size_t c = 0; c < cells.size(); ++c) {
        int successes = 0;
        int total = 0;
        for (const auto& row : results[c].rows) {
            rows.push_back(row);
            // rel_rmse is the 10th field.
            const auto fields = split_on(row, ',');
            const double rel = std::strtod(fields[9].c_str(), nullptr);
            ++total;
            if (std::isfinite(rel) && rel < cfg.success_tol) ++successes;
        }
        const double rate = total ? static_cast<double>(successes) / total : 0.0;
        std::string srow = cfg.id + "," + cfg.model + "," + cells[c].alg + "," +
                           rank_string(cells[c].r) + "," + rank_string(cfg.r_star) +
                           "," + std::to_string(cells[c].n) + "," +
                           std::to_string(total) + "," + std::to_string(successes) +
                           "," + fmt(rate) + ",cell";
        summary.push_back(srow);
        per_ar[{cells[c].alg, rank_string(cells[c].r)}].push_back({cells[c].n, rate});
    }
    if (with_min_rows) {
        for (const auto& [key, points] : per_ar) {
            Index min_n = -1;
            for (const auto& [n, rate] : points) {
                if (rate >= 0.5 && (min_n < 0 || n < min_n)) min_n = n;
            }
            summary.push_back(cfg.id + "," + cfg.model + "," + key.first + "," +
                              key.second + "," + rank_string(cfg.r_star) + "," +
                              std::to_string(min_n) + ",,," + "," + "min_n");
        }
    }

    write_csv(cfg.out_path, config_metadata(cfg), kTraceHeader, rows);
    write_csv(with_suffix(cfg.out_path, "summary"), config_metadata(cfg),
              "experiment_id,model,algorithm,r,r_star,n,seeds,successes,"
              "success_rate,row_type",
              summary);
}

} // namespace

void run_convergence(const ExperimentConfig& cfg) {
    struct Cell {
        std::string alg;
        std::vector<Index> r;
        Index n;
        int seed;
    };
    std::vector<Cell> cells;
    for (const auto& alg : cfg.algorithms)
        for (const auto& r : cfg.r_grid)
            for (Index n : cfg.n_grid)
                for (int seed = 0; seed < cfg.seeds; ++seed)
                    cells.push_back({alg, r, n, seed});

    std::vector<std::function<CellResult()>> tasks;
    for (const auto& cell : cells) {
        tasks.push_back([&cfg, cell] {
            CellResult res;
            RunTrace trace = run_replicate(cfg, cell.alg, cell.n, cell.r, cell.seed);
            for (const auto& rec : trace.records)
                res.rows.push_back(
                    trace_row(cfg, cell.alg, cell.seed, cell.n, cell.r, rec));
            return res;
        });
    }
    auto results = run_cells(cfg.jobs, std::move(tasks));

    std::vector<std::string> rows;
    for (const auto& r : results)
        rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    write_csv(cfg.out_path, config_metadata(cfg), kTraceHeader, rows);
}

void run_phase(const ExperimentConfig& cfg) { run_grid(cfg, false); }

void run_rank_sweep(const ExperimentConfig& cfg) { run_grid(cfg, true); }

void run_compare(const ExperimentConfig& cfg) {
    struct Cell {
        std::vector<Index> r;
        Index n;
        int seed;
    };
    std::vector<Cell> cells;
    for (const auto& r : cfg.r_grid)
        for (Index n : cfg.n_grid)
            for (int seed = 0; seed < cfg.seeds; ++seed)
                cells.push_back({r, n, seed});

    std::vector<std::function<CellResult()>> tasks;
    for (const auto& cell : cells) {
        tasks.push_back([&cfg, cell] {
            CellResult res;
            // One instance + one initialization shared by every algorithm.
            ProblemInstance inst = make_instance(cfg, cell.n, cell.seed);
            TuckerTensor x0 = make_initialization(cfg, inst, cell.r);
            for (const auto& alg : cfg.algorithms) {
                auto [xt, trace] =
                    solve(inst, cell_solver_config(cfg, alg, cell.r), x0);
                (void)xt;
                for (const auto& rec : trace.records)
                    res.rows.push_back(
                        trace_row(cfg, alg, cell.seed, cell.n, cell.r, rec));
                const Algorithm a = algorithm_from_name(alg);
                if ((a == Algorithm::Pgd || a == Algorithm::FactoredGd) &&
                    trace.records.size() > 1) {
                    res.meta.push_back(alg + "_stepsize.n" + std::to_string(cell.n) +
                                       ".r" + rank_string(cell.r) + ".seed" +
                                       std::to_string(cell.seed) + "=" +
                                       fmt(trace.records[1].stepsize));
                }
                if (trace.diverged)
                    res.meta.push_back(alg + "_diverged.n" + std::to_string(cell.n) +
                                       ".r" + rank_string(cell.r) + ".seed" +
                                       std::to_string(cell.seed) + "=1");
            }
            return res;
        });
    }
    auto results = run_cells(cfg.jobs, std::move(tasks));

    std::vector<std::string> meta = config_metadata(cfg);
    std::vector<std::string> rows;
    for (const auto& r : results) {
        meta.insert(meta.end(), r.meta.begin(), r.meta.end());
        rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    }
    write_csv(cfg.out_path, meta, kTraceHeader, rows);
}

void run_ldp_table(const ExperimentConfig& cfg) {
    auto rows = gap_table(cfg.ldp_p_grid, cfg.ldp_d, cfg.ldp_r_star,
                          cfg.ldp_degree, cfg.ldp_delta, cfg.ldp_sigma_sq);
    std::vector<std::string> out;
    for (const auto& row : rows) {
        out.push_back(cfg.id + "," + std::to_string(cfg.ldp_d) + "," +
                      fmt(cfg.ldp_r_star) + "," + std::to_string(cfg.ldp_degree) +
                      "," + fmt(cfg.ldp_delta) + "," + fmt(cfg.ldp_sigma_sq) + "," +
                      fmt(row.p) + "," + fmt(row.statistical) + "," +
                      fmt(row.algorithmic) + "," + fmt(row.ld_threshold));
    }
    write_csv(cfg.out_path, config_metadata(cfg),
              "experiment_id,d,r_star,degree,delta,sigma_sq,p,"
              "statistical_df_proxy,algorithmic_power_proxy,ld_threshold",
              out);

    // Closed form vs Monte Carlo on random moment profiles.
    std::vector<std::string> verify;
    Rng root(cfg.base_seed);
    for (int t = 0; t < cfg.ldp_profiles; ++t) {
        Rng rng = root.split(static_cast<std::uint64_t>(t));
        HermiteDegreeProfile prof;
        const int w = 1 + static_cast<int>(rng.uniform() * 3);
        long long beta_sum = 0;
        for (int j = 0; j < w; ++j) {
            const int b = static_cast<int>(rng.uniform() * 4); // 0..3
            prof.beta.push_back(b);
            beta_sum += b;
        }
        // Every fifth profile deliberately mismatches the degree so the
        // indicator case is exercised.
        prof.alpha = static_cast<int>(beta_sum) + ((t % 5 == 4) ? 1 : 0);
        double usq = 0.0;
        for (int j = 0; j < w; ++j) {
            prof.u.push_back(2.0 * rng.uniform() - 1.0);
            usq += prof.u.back() * prof.u.back();
        }
        if (usq > 0.9) {
            const double shrink = std::sqrt(0.9 / usq);
            for (double& u : prof.u) u *= shrink;
        }
        const double exact = correlated_expectation(prof);
        auto [est, se] = mc_verify_expectation(
            prof, cfg.ldp_mc_samples,
            combine_seed(cfg.base_seed, {static_cast<std::uint64_t>(t), 77}));
        const bool pass = std::abs(exact - est) <= 3.0 * se + 1e-12;
        std::string betas, us;
        for (int j = 0; j < w; ++j) {
            betas += (j ? " " : "") + std::to_string(prof.beta[j]);
            us += (j ? " " : "") + fmt(prof.u[j]);
        }
        verify.push_back(std::to_string(t) + "," + std::to_string(prof.alpha) +
                         "," + betas + "," + us + "," + fmt(exact) + "," +
                         fmt(est) + "," + fmt(se) + "," +
                         (pass ? "PASS" : "FAIL"));
    }
    write_csv(with_suffix(cfg.out_path, "verify"), config_metadata(cfg),
              "profile_id,alpha,beta,u,exact,mc_estimate,mc_stderr,check",
              verify);
}

void run_experiment(const ExperimentConfig& cfg) {
    if (cfg.kind == "convergence") run_convergence(cfg);
    else if (cfg.kind == "phase") run_phase(cfg);
    else if (cfg.kind == "rank-sweep") run_rank_sweep(cfg);
    else if (cfg.kind == "compare") run_compare(cfg);
    else if (cfg.kind == "ldp") run_ldp_table(cfg);
    else throw std::invalid_argument("unknown experiment kind: " + cfg.kind);
}

} // namespace totreg
