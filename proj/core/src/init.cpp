#include "totreg/init.hpp"

#include "totreg/errors.hpp"

#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace totreg {

namespace {

/// Per-mode SVD factors of t followed by one HOOI sweep.
TuckerTensor spectral_hooi(const DenseTensor& t, const std::vector<Index>& r,
                           bool hooi_inplace) {
    const Index d = t.order();
    std::vector<Matrix> factors(static_cast<size_t>(d));
    for (Index k = 0; k < d; ++k)
        factors[static_cast<size_t>(k)] =
            leading_left_singular_vectors(matricize(t, k), r[static_cast<size_t>(k)]);
    return ohooi(t, factors, r, hooi_inplace);
}

} // namespace

TuckerTensor init_scalar_on_tensor(const ProblemInstance& instance,
                                   const std::vector<Index>& r,
                                   bool hooi_inplace) {
    if (instance.design.m != 0)
        throw std::invalid_argument("init_scalar_on_tensor: requires scalar responses (m = 0)");
    DenseTensor t = adjoint(instance.design, instance.observations);
    return spectral_hooi(t, r, hooi_inplace);
}

TuckerTensor init_tensor_on_vector(const ProblemInstance& instance,
                                   const std::vector<Index>& r,
                                   bool hooi_inplace) {
    const LinearDesign& design = instance.design;
    if (design.kind != DesignKind::Vector)
        throw std::invalid_argument("init_tensor_on_vector: requires a vector design");
    const Index n = design.n();
    const Index p1 = design.covariate_shape[0];
    if (n < p1)
        throw DegenerateDesignError("init_tensor_on_vector: requires n >= p_1");

    const Matrix abar = design.scale * design.a;
    Matrix q = qr_orthonormal(abar);
    Matrix rfac = q.transpose() * abar; // p1 x p1, upper triangular
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < p1; ++j) {
        const double a = std::abs(rfac(j, j));
        dmax = std::max(dmax, a);
        dmin = std::min(dmin, a);
    }
    if (dmax <= 0.0 || dmin < 1e-12 * dmax)
        throw DegenerateDesignError("init_tensor_on_vector: covariate matrix is rank-deficient");

    // Rotated problem: observations with the covariates whitened away.
    DenseTensor ybar = mode_product(instance.observations, q.transpose(), 0);
    TuckerTensor xbar = spectral_hooi(ybar, r, hooi_inplace);

    // Undo the mode-1 change of variables by triangular back-substitution,
    // then restore factor orthonormality by absorbing the QR remainder
    // into the core.
    Matrix f = rfac.triangularView<Eigen::Upper>().solve(xbar.factors[0]);
    Matrix u1 = qr_orthonormal(f);
    Matrix rf = u1.transpose() * f;
    TuckerTensor out = std::move(xbar);
    out.factors[0] = std::move(u1);
    out.core = mode_product(out.core, rf, 0);
    return out;
}

TuckerTensor init_matrix_trace(const ProblemInstance& instance,
                               const std::vector<Index>& r) {
    const LinearDesign& design = instance.design;
    if (design.d != 2 || design.m != 0)
        throw std::invalid_argument("init_matrix_trace: requires d = 2, m = 0");
    DenseTensor t = adjoint(design, instance.observations);
    return retract(t, r, Retraction::MatrixSvd);
}

TuckerTensor initialize(const ProblemInstance& instance,
                        const std::vector<Index>& r, bool hooi_inplace) {
    const LinearDesign& design = instance.design;
    if (design.kind == DesignKind::MatrixTrace) return init_matrix_trace(instance, r);
    if (design.kind == DesignKind::Vector)
        return init_tensor_on_vector(instance, r, hooi_inplace);
    if (design.m == 0) return init_scalar_on_tensor(instance, r, hooi_inplace);
    // General designs with tensor responses: same spectral recipe applied
    // to the back-projected observations over all d + m modes.
    DenseTensor t = adjoint(design, instance.observations);
    return spectral_hooi(t, r, hooi_inplace);
}

} // namespace totreg
