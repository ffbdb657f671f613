#include "totreg/io.hpp"

#include "totreg/tucker.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace totreg {

namespace fs = std::filesystem;

void write_tensor(std::ostream& os, const DenseTensor& t) {
    for (Index k = 0; k < t.order(); ++k) {
        if (k) os << ' ';
        os << t.extent(k);
    }
    os << '\n' << std::setprecision(17);
    for (Index f = 0; f < t.size(); ++f) os << t[f] << '\n';
}

DenseTensor read_tensor(std::istream& is) {
    std::string header;
    if (!std::getline(is, header))
        throw std::runtime_error("tensor read: missing shape header");
    std::istringstream hs(header);
    std::vector<Index> shape;
    Index p;
    while (hs >> p) shape.push_back(p);
    if (shape.empty()) throw std::runtime_error("tensor read: empty shape header");
    DenseTensor t(shape);
    for (Index f = 0; f < t.size(); ++f) {
        if (!(is >> t[f]))
            throw std::runtime_error("tensor read: truncated data section");
    }
    return t;
}

void save_tensor(const fs::path& path, const DenseTensor& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    write_tensor(os, t);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

DenseTensor load_tensor(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
    return read_tensor(is);
}

std::string design_kind_name(DesignKind kind) {
    switch (kind) {
    case DesignKind::General: return "general";
    case DesignKind::Vector: return "vector";
    case DesignKind::MatrixTrace: return "matrix-trace";
    }
    return "general";
}

DesignKind design_kind_from_name(const std::string& name) {
    if (name == "general") return DesignKind::General;
    if (name == "vector") return DesignKind::Vector;
    if (name == "matrix-trace") return DesignKind::MatrixTrace;
    throw std::invalid_argument("unknown design kind: " + name);
}

namespace {

std::map<std::string, std::string> read_metadata(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("metadata line without '=': " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

const std::string& require(const std::map<std::string, std::string>& kv,
                           const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("metadata missing key: " + key);
    return it->second;
}

} // namespace

void save_instance(const fs::path& dir, const ProblemInstance& inst) {
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "metadata.txt");
        if (!os) throw std::runtime_error("cannot write instance metadata");
        os << std::setprecision(17);
        os << "kind=" << design_kind_name(inst.design.kind) << '\n';
        os << "d=" << inst.design.d << '\n';
        os << "m=" << inst.design.m << '\n';
        os << "n=" << inst.design.n() << '\n';
        os << "scale=" << inst.design.scale << '\n';
        os << "sigma=" << inst.noise_sigma << '\n';
        os << "dims=";
        const auto ambient = inst.ambient_shape();
        for (size_t k = 0; k < ambient.size(); ++k)
            os << (k ? " " : "") << ambient[k];
        os << '\n';
        os << "has_ground_truth=" << (inst.ground_truth ? 1 : 0) << '\n';
    }

    // Design matrix stored as its (n, p_1, ..., p_d) stack tensor.
    std::vector<Index> stack_shape{inst.design.n()};
    stack_shape.insert(stack_shape.end(), inst.design.covariate_shape.begin(),
                       inst.design.covariate_shape.end());
    save_tensor(dir / "design.txt",
                DenseTensor(stack_shape,
                            Eigen::Map<const Vector>(inst.design.a.data(),
                                                     inst.design.a.size())));
    save_tensor(dir / "observations.txt", inst.observations);
    if (inst.ground_truth)
        save_tensor(dir / "ground_truth.txt", inst.ground_truth->dense());
}

ProblemInstance load_instance(const fs::path& dir) {
    auto kv = read_metadata(dir / "metadata.txt");

    ProblemInstance inst;
    inst.design.kind = design_kind_from_name(require(kv, "kind"));
    inst.design.d = std::stoll(require(kv, "d"));
    inst.design.m = std::stoll(require(kv, "m"));
    inst.design.scale = std::stod(require(kv, "scale"));
    inst.noise_sigma = std::stod(require(kv, "sigma"));

    DenseTensor stack = load_tensor(dir / "design.txt");
    const Index n = stack.extent(0);
    if (n != std::stoll(require(kv, "n")))
        throw std::runtime_error("instance metadata n does not match design stack");
    inst.design.covariate_shape.assign(stack.shape().begin() + 1, stack.shape().end());
    inst.design.a = Eigen::Map<const Matrix>(stack.data().data(), n, stack.size() / n);

    inst.observations = load_tensor(dir / "observations.txt");
    inst.design.validate();

    if (require(kv, "has_ground_truth") == "1") {
        DenseTensor truth = load_tensor(dir / "ground_truth.txt");
        // Stored dense; refit an exact full-rank Tucker form.
        inst.ground_truth = thosvd(truth, truth.shape());
    }
    return inst;
}

} // namespace totreg
