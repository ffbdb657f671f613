#include "totreg/regression.hpp"

#include "totreg/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace totreg {

namespace {

Index shape_product(const std::vector<Index>& s) {
    Index n = 1;
    for (Index p : s) n *= p;
    return n;
}

} // namespace

DenseTensor LinearDesign::covariate(Index i) const {
    if (i < 0 || i >= n()) throw std::invalid_argument("covariate index out of range");
    return DenseTensor(covariate_shape, a.row(i).transpose());
}

void LinearDesign::validate() const {
    if (a.rows() < 1) throw std::invalid_argument("design needs at least one measurement");
    if (static_cast<Index>(covariate_shape.size()) != d)
        throw std::invalid_argument("covariate shape must have d modes");
    if (a.cols() != shape_product(covariate_shape))
        throw std::invalid_argument("design matrix width does not match covariate shape");
    if (kind == DesignKind::Vector && d != 1)
        throw std::invalid_argument("vector designs have order-1 covariates");
    if (kind == DesignKind::MatrixTrace && (d != 2 || m != 0))
        throw std::invalid_argument("matrix-trace designs require d=2, m=0");
}

std::vector<Index> observation_shape(const LinearDesign& design,
                                     const std::vector<Index>& ambient) {
    std::vector<Index> out{design.n()};
    for (size_t k = static_cast<size_t>(design.d); k < ambient.size(); ++k)
        out.push_back(ambient[k]);
    return out;
}

DenseTensor apply(const LinearDesign& design, const DenseTensor& x) {
    if (x.order() != design.d + design.m)
        throw std::invalid_argument("apply: regressor order must be d + m");
    for (Index k = 0; k < design.d; ++k)
        if (x.extent(k) != design.covariate_shape[static_cast<size_t>(k)])
            throw std::invalid_argument("apply: leading extents do not match covariates");

    const Index q = design.a.cols();
    const Index mprod = x.size() / q;
    Eigen::Map<const Matrix> xm(x.data().data(), q, mprod);
    Matrix y = design.scale * (design.a * xm); // n x mprod

    std::vector<Index> out_shape{design.n()};
    for (Index k = design.d; k < x.order(); ++k) out_shape.push_back(x.extent(k));
    return DenseTensor(out_shape, Eigen::Map<const Vector>(y.data(), y.size()));
}

DenseTensor adjoint(const LinearDesign& design, const DenseTensor& r) {
    if (r.extent(0) != design.n())
        throw std::invalid_argument("adjoint: leading extent must equal n");
    if (r.order() != 1 + design.m)
        throw std::invalid_argument("adjoint: input order must be 1 + m");

    const Index mprod = r.size() / design.n();
    Eigen::Map<const Matrix> rm(r.data().data(), design.n(), mprod);
    Matrix z = design.scale * (design.a.transpose() * rm); // q x mprod

    std::vector<Index> out_shape = design.covariate_shape;
    for (Index k = 1; k < r.order(); ++k) out_shape.push_back(r.extent(k));
    return DenseTensor(out_shape, Eigen::Map<const Vector>(z.data(), z.size()));
}

std::vector<Index> ProblemInstance::ambient_shape() const {
    std::vector<Index> out = design.covariate_shape;
    for (Index k = 1; k < observations.order(); ++k)
        out.push_back(observations.extent(k));
    return out;
}

ProblemInstance generate_gaussian_instance(const std::vector<Index>& dims,
                                           Index d, Index m,
                                           const std::vector<Index>& r_star,
                                           double sigma, Index n,
                                           std::uint64_t seed, DesignKind kind) {
    if (static_cast<Index>(dims.size()) != d + m || d < 1)
        throw std::invalid_argument("generate_gaussian_instance: dims must have d + m modes");
    if (static_cast<Index>(r_star.size()) != d + m)
        throw std::invalid_argument("generate_gaussian_instance: one rank per mode required");
    for (size_t k = 0; k < dims.size(); ++k)
        if (r_star[k] < 1 || r_star[k] > dims[k])
            throw std::invalid_argument("generate_gaussian_instance: rank out of range");
    if (n < 1 || sigma < 0)
        throw std::invalid_argument("generate_gaussian_instance: need n >= 1 and sigma >= 0");
    if (kind == DesignKind::Vector && d != 1)
        throw std::invalid_argument("generate_gaussian_instance: vector kind requires d = 1");
    if (kind == DesignKind::MatrixTrace && (d != 2 || m != 0))
        throw std::invalid_argument("generate_gaussian_instance: matrix-trace kind requires d=2, m=0");

    Rng root(seed);

    // Ground truth.
    TuckerTensor truth;
    {
        Rng rc = root.split(1);
        DenseTensor core(r_star);
        for (Index f = 0; f < core.size(); ++f) core[f] = rc.normal();
        truth.core = std::move(core);
        truth.factors.resize(dims.size());
        for (size_t k = 0; k < dims.size(); ++k) {
            Rng rf = root.split(16 + static_cast<std::uint64_t>(k));
            truth.factors[k] = random_orthonormal(rf, dims[k], r_star[k]);
        }
    }

    // Design.
    LinearDesign design;
    design.kind = kind;
    design.d = d;
    design.m = m;
    design.covariate_shape.assign(dims.begin(), dims.begin() + d);
    design.scale = 1.0 / std::sqrt(static_cast<double>(n));
    const Index q = shape_product(design.covariate_shape);
    design.a.resize(n, q);
    {
        Rng ra = root.split(2);
        for (Index j = 0; j < q; ++j)
            for (Index i = 0; i < n; ++i) design.a(i, j) = ra.normal();
    }

    ProblemInstance inst;
    inst.design = std::move(design);
    inst.noise_sigma = sigma;
    inst.observations = apply(inst.design, truth.dense());
    if (sigma > 0) {
        Rng re = root.split(3);
        for (Index f = 0; f < inst.observations.size(); ++f)
            inst.observations[f] += inst.design.scale * sigma * re.normal();
    }
    inst.ground_truth = std::move(truth);
    return inst;
}

std::pair<double, double> estimate_trip(const LinearDesign& design,
                                        const std::vector<Index>& r,
                                        int trials, std::uint64_t seed,
                                        const std::vector<Index>& trailing) {
    if (trials < 1) throw std::invalid_argument("estimate_trip: trials must be >= 1");
    if (static_cast<Index>(r.size()) != design.d + design.m)
        throw std::invalid_argument("estimate_trip: one rank per mode required");
    if (static_cast<Index>(trailing.size()) != design.m)
        throw std::invalid_argument("estimate_trip: trailing extents must cover the m response modes");

    std::vector<Index> ambient = design.covariate_shape;
    ambient.insert(ambient.end(), trailing.begin(), trailing.end());
    for (size_t k = 0; k < ambient.size(); ++k)
        if (r[k] < 1 || r[k] > ambient[k])
            throw std::invalid_argument("estimate_trip: rank out of range");

    Rng root(seed);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int t = 0; t < trials; ++t) {
        Rng rng = root.split(static_cast<std::uint64_t>(t));
        TuckerTensor z;
        DenseTensor core(r);
        for (Index f = 0; f < core.size(); ++f) core[f] = rng.normal();
        core *= 1.0 / frob_norm(core);
        z.core = std::move(core);
        z.factors.resize(ambient.size());
        for (size_t k = 0; k < ambient.size(); ++k)
            z.factors[k] = random_orthonormal(rng, ambient[k], r[k]);
        const double e = apply(design, z.dense()).data().squaredNorm();
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    return {lo, hi};
}

} // namespace totreg
