#include "totreg/manifold.hpp"

#include "totreg/errors.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <stdexcept>

namespace totreg {

namespace {

constexpr double kDegenerateTol = 1e-12;

/// Applies the Kronecker map (U_D x ... x U_{k+1} x U_{k-1} x ... x U_1)
/// to each column of v without materializing it: each column is reshaped
/// to a tensor over the remaining modes and multiplied mode by mode.
Matrix assemble_w(const TuckerTensor& base, const Matrix& v, Index k) {
    const Index d = base.order();
    std::vector<Index> rest_shape;
    std::vector<const Matrix*> rest_factors;
    Index p_rest = 1;
    for (Index j = 0; j < d; ++j) {
        if (j == k) continue;
        rest_shape.push_back(base.core.extent(j));
        rest_factors.push_back(&base.factors[static_cast<size_t>(j)]);
        p_rest *= base.factors[static_cast<size_t>(j)].rows();
    }
    Matrix w(p_rest, v.cols());
    for (Index c = 0; c < v.cols(); ++c) {
        DenseTensor col(rest_shape, v.col(c));
        for (size_t j = 0; j < rest_factors.size(); ++j)
            col = mode_product(col, *rest_factors[j], static_cast<Index>(j));
        w.col(c) = col.data();
    }
    return w;
}

} // namespace

Gauge compute_gauge(const TuckerTensor& x, bool pad_degenerate) {
    const Index d = x.order();
    Gauge g;
    g.base = x;
    g.v.resize(static_cast<size_t>(d));
    g.w.resize(static_cast<size_t>(d));
    g.u_perp.resize(static_cast<size_t>(d));

    for (Index k = 0; k < d; ++k) {
        const Index rk = x.core.extent(k);
        Matrix mk = matricize(x.core, k); // r_k x r_{-k}
        if (mk.cols() < rk)
            throw DegeneratePointError(
                "compute_gauge: rank tuple not realizable (r_k exceeds the "
                "product of the remaining ranks)");

        Eigen::JacobiSVD<Matrix> svd(mk);
        const Vector& sv = svd.singularValues();
        const bool deficient = sv(0) <= 0.0 || sv(rk - 1) < kDegenerateTol * sv(0);
        if (deficient && !pad_degenerate)
            throw DegeneratePointError("compute_gauge: core matricization is rank-deficient");

        if (!deficient) {
            g.v[static_cast<size_t>(k)] = qr_orthonormal(mk.transpose());
        } else {
            // Padded basis: leading (and null-space) left singular vectors of
            // M_k(core)^T, deterministically sign-fixed.
            g.v[static_cast<size_t>(k)] =
                leading_left_singular_vectors(mk.transpose(), rk);
        }
        g.w[static_cast<size_t>(k)] = assemble_w(x, g.v[static_cast<size_t>(k)], k);
        g.u_perp[static_cast<size_t>(k)] =
            orthonormal_complement(x.factors[static_cast<size_t>(k)]);
    }
    return g;
}

DenseTensor project_tangent(const Gauge& g, const DenseTensor& z) {
    const Index d = g.order();
    const std::vector<Index> ambient = g.base.ambient_shape();
    if (z.shape() != ambient)
        throw std::invalid_argument("project_tangent: shape mismatch with base point");

    // Core part: compress then expand through the factors.
    DenseTensor comp = z;
    for (Index k = 0; k < d; ++k)
        comp = mode_product(comp, g.base.factors[static_cast<size_t>(k)].transpose(), k);
    DenseTensor out = comp;
    for (Index k = 0; k < d; ++k)
        out = mode_product(out, g.base.factors[static_cast<size_t>(k)], k);

    // Off-subspace parts: T_k(P_{U_k_perp} M_k(z) P_{W_k}) per mode.
    for (Index k = 0; k < d; ++k) {
        const Matrix& uperp = g.u_perp[static_cast<size_t>(k)];
        const Matrix& w = g.w[static_cast<size_t>(k)];
        if (uperp.cols() == 0) continue;
        Matrix mk = matricize(z, k);
        Matrix small = uperp.transpose() * mk * w; // (p_k - r_k) x r_k
        Matrix term = (uperp * small) * w.transpose();
        out += tensorize(term, k, ambient);
    }
    return out;
}

DenseTensor project_tangent_complement(const Gauge& g, const DenseTensor& z) {
    return z - project_tangent(g, z);
}

DenseTensor tangent_to_dense(const TangentVector& tv) {
    const Gauge& g = *tv.gauge;
    const Index d = g.order();
    if (!tv.b.same_shape(g.base.core))
        throw std::invalid_argument("tangent_to_dense: core perturbation shape mismatch");

    DenseTensor out = tv.b;
    for (Index k = 0; k < d; ++k)
        out = mode_product(out, g.base.factors[static_cast<size_t>(k)], k);

    for (Index k = 0; k < d; ++k) {
        const Matrix& uperp = g.u_perp[static_cast<size_t>(k)];
        const Matrix& dk = tv.d[static_cast<size_t>(k)];
        if (uperp.cols() == 0) continue;
        if (dk.rows() != uperp.cols() || dk.cols() != g.base.core.extent(k))
            throw std::invalid_argument("tangent_to_dense: d-block shape mismatch");
        DenseTensor term = g.base.core;
        for (Index j = 0; j < d; ++j) {
            if (j == k)
                term = mode_product(term, uperp * dk, j);
            else
                term = mode_product(term, g.base.factors[static_cast<size_t>(j)], j);
        }
        out += term;
    }
    return out;
}

TangentVector dense_to_tangent(const std::shared_ptr<const Gauge>& g,
                               const DenseTensor& z) {
    const Index d = g->order();
    const double nz = frob_norm(z);
    DenseTensor resid = project_tangent_complement(*g, z);
    if (frob_norm(resid) > 1e-8 * (nz > 0 ? nz : 1.0))
        throw std::invalid_argument("dense_to_tangent: input is not in the tangent space");

    TangentVector tv;
    tv.gauge = g;
    tv.b = z;
    for (Index k = 0; k < d; ++k)
        tv.b = mode_product(tv.b, g->base.factors[static_cast<size_t>(k)].transpose(), k);

    tv.d.resize(static_cast<size_t>(d));
    for (Index k = 0; k < d; ++k) {
        const Matrix& uperp = g->u_perp[static_cast<size_t>(k)];
        const Index rk = g->base.core.extent(k);
        if (uperp.cols() == 0) {
            tv.d[static_cast<size_t>(k)] = Matrix(0, rk);
            continue;
        }
        Matrix lhs = uperp.transpose() * matricize(z, k) * g->w[static_cast<size_t>(k)];
        Matrix gram = matricize(g->base.core, k) * g->v[static_cast<size_t>(k)]; // r_k x r_k
        Eigen::FullPivLU<Matrix> lu(gram.transpose());
        if (!lu.isInvertible())
            throw DegeneratePointError("dense_to_tangent: M_k(S) V_k is singular");
        // D_k = lhs * gram^{-1}
        tv.d[static_cast<size_t>(k)] = lu.solve(lhs.transpose()).transpose();
    }
    return tv;
}

} // namespace totreg
