#pragma once

#include "totreg/tensor.hpp"
#include "totreg/tucker.hpp"

#include <memory>
#include <vector>

namespace totreg {

/// Gauge quantities of the fixed-Tucker-rank manifold at a base point:
/// row-space bases V_k of the core matricizations, the assembled row-span
/// bases W_k of the ambient matricizations, and the factor complements.
struct Gauge {
    TuckerTensor base;
    std::vector<Matrix> v;       // r_{-k} x r_k, orthonormal columns
    std::vector<Matrix> w;       // p_{-k} x r_k, orthonormal columns
    std::vector<Matrix> u_perp;  // p_k x (p_k - r_k)

    Index order() const { return base.order(); }
};

/// Computes the gauge at x. Throws DegeneratePointError when a core
/// matricization is rank-deficient (smallest singular value below
/// 1e-12 x largest) unless pad_degenerate is set, in which case V_k is
/// padded with deterministically ordered null-space columns.
Gauge compute_gauge(const TuckerTensor& x, bool pad_degenerate = false);

/// Orthogonal projection of z onto the tangent space at the gauge's base.
DenseTensor project_tangent(const Gauge& g, const DenseTensor& z);

/// z minus its tangent-space projection.
DenseTensor project_tangent_complement(const Gauge& g, const DenseTensor& z);

/// Tangent vector in gauge coordinates: core perturbation b (r_1 x...x r_D)
/// and per-mode off-subspace blocks d_k in R^{(p_k - r_k) x r_k}.
struct TangentVector {
    std::shared_ptr<const Gauge> gauge;
    DenseTensor b;
    std::vector<Matrix> d;
};

/// Dense ambient form: b x_k U_k + sum_k S x_k (U_{k_perp} d_k) x_{j!=k} U_j.
DenseTensor tangent_to_dense(const TangentVector& tv);

/// Inverts the parameterization for z in the tangent space (projector
/// residual below 1e-8 relative). Throws DegeneratePointError when
/// M_k(S) V_k is singular.
TangentVector dense_to_tangent(const std::shared_ptr<const Gauge>& g,
                               const DenseTensor& z);

} // namespace totreg
