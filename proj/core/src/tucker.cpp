#include "totreg/tucker.hpp"

#include "totreg/errors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace totreg {

namespace {

constexpr double kOrthoTol = 1e-10;

/// Flip column signs so the largest-magnitude entry of each u-column is
/// positive; ties broken by lowest index. v (if given) flips to match.
void fix_signs(Matrix& u, Matrix* v) {
    for (Index j = 0; j < u.cols(); ++j) {
        Index imax = 0;
        double amax = -1.0;
        for (Index i = 0; i < u.rows(); ++i) {
            double a = std::abs(u(i, j));
            if (a > amax) {
                amax = a;
                imax = i;
            }
        }
        if (u(imax, j) < 0.0) {
            u.col(j) = -u.col(j);
            if (v) v->col(j) = -v->col(j);
        }
    }
}

double ortho_error(const Matrix& u) {
    return (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).norm();
}

} // namespace

std::vector<Index> TuckerTensor::ambient_shape() const {
    std::vector<Index> shape(factors.size());
    for (size_t k = 0; k < factors.size(); ++k) shape[k] = factors[k].rows();
    return shape;
}

DenseTensor TuckerTensor::dense() const {
    DenseTensor out = core;
    for (Index k = 0; k < order(); ++k)
        out = mode_product(out, factors[static_cast<size_t>(k)], k);
    return out;
}

void TuckerTensor::validate() const {
    if (static_cast<Index>(factors.size()) != core.order())
        throw std::invalid_argument("TuckerTensor: one factor per core mode required");
    for (Index k = 0; k < order(); ++k) {
        const Matrix& u = factors[static_cast<size_t>(k)];
        if (u.cols() != core.extent(k))
            throw std::invalid_argument("TuckerTensor: factor/core extent mismatch");
        if (u.cols() > u.rows())
            throw std::invalid_argument("TuckerTensor: rank exceeds ambient extent");
        if (ortho_error(u) > kOrthoTol)
            throw std::invalid_argument("TuckerTensor: factor not column-orthonormal");
    }
}

TruncatedSVD truncated_svd(const Matrix& m, Index r) {
    if (r < 1 || r > std::min(m.rows(), m.cols()))
        throw std::invalid_argument("truncated_svd: rank out of range");
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw NumericalFailureError("truncated_svd: SVD did not converge");
    TruncatedSVD out;
    out.u = svd.matrixU().leftCols(r);
    out.s = svd.singularValues().head(r);
    out.v = svd.matrixV().leftCols(r);
    fix_signs(out.u, &out.v);
    return out;
}

Matrix leading_left_singular_vectors(const Matrix& m, Index r) {
    if (r < 1 || r > m.rows())
        throw std::invalid_argument("leading_left_singular_vectors: rank out of range");
    const Index thin = std::min(m.rows(), m.cols());
    if (r <= thin) {
        Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
        if (svd.info() != Eigen::Success)
            throw NumericalFailureError("SVD did not converge");
        Matrix u = svd.matrixU().leftCols(r);
        fix_signs(u, nullptr);
        return u;
    }
    // r > cols: pad with null-space columns from the full decomposition.
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullU);
    if (svd.info() != Eigen::Success)
        throw NumericalFailureError("SVD did not converge");
    Matrix u = svd.matrixU().leftCols(r);
    fix_signs(u, nullptr);
    return u;
}

TuckerTensor thosvd(const DenseTensor& t, const std::vector<Index>& r) {
    const Index d = t.order();
    if (static_cast<Index>(r.size()) != d)
        throw std::invalid_argument("thosvd: rank tuple order mismatch");
    TuckerTensor out;
    out.factors.resize(static_cast<size_t>(d));
    for (Index k = 0; k < d; ++k) {
        if (r[static_cast<size_t>(k)] > t.extent(k))
            throw std::invalid_argument("thosvd: rank exceeds extent");
        out.factors[static_cast<size_t>(k)] =
            leading_left_singular_vectors(matricize(t, k), r[static_cast<size_t>(k)]);
    }
    out.core = t;
    for (Index k = 0; k < d; ++k)
        out.core = mode_product(out.core, out.factors[static_cast<size_t>(k)].transpose(), k);
    return out;
}

TuckerTensor sthosvd(const DenseTensor& t, const std::vector<Index>& r) {
    const Index d = t.order();
    if (static_cast<Index>(r.size()) != d)
        throw std::invalid_argument("sthosvd: rank tuple order mismatch");
    TuckerTensor out;
    out.factors.resize(static_cast<size_t>(d));
    DenseTensor work = t;
    for (Index k = 0; k < d; ++k) {
        if (r[static_cast<size_t>(k)] > t.extent(k))
            throw std::invalid_argument("sthosvd: rank exceeds extent");
        // Mode-k left singular vectors of the projected tensor equal those of
        // the sequentially compressed tensor.
        Matrix u = leading_left_singular_vectors(matricize(work, k), r[static_cast<size_t>(k)]);
        out.factors[static_cast<size_t>(k)] = u;
        work = mode_product(work, u.transpose(), k);
    }
    out.core = std::move(work);
    return out;
}

TuckerTensor ohooi(const DenseTensor& t, const std::vector<Matrix>& init_factors,
                   const std::vector<Index>& r, bool inplace) {
    const Index d = t.order();
    if (static_cast<Index>(init_factors.size()) != d ||
        static_cast<Index>(r.size()) != d)
        throw std::invalid_argument("ohooi: one init factor and rank per mode required");
    for (Index k = 0; k < d; ++k) {
        const Matrix& u = init_factors[static_cast<size_t>(k)];
        if (u.rows() != t.extent(k) || u.cols() != r[static_cast<size_t>(k)])
            throw std::invalid_argument("ohooi: init factor extent mismatch");
        if (ortho_error(u) > 1e-8)
            throw std::invalid_argument("ohooi: init factor not column-orthonormal");
    }
    std::vector<Matrix> updated(static_cast<size_t>(d));
    for (Index k = 0; k < d; ++k) {
        DenseTensor comp = t;
        for (Index j = 0; j < d; ++j) {
            if (j == k) continue;
            const Matrix& f = (inplace && j < k) ? updated[static_cast<size_t>(j)]
                                                 : init_factors[static_cast<size_t>(j)];
            comp = mode_product(comp, f.transpose(), j);
        }
        updated[static_cast<size_t>(k)] =
            leading_left_singular_vectors(matricize(comp, k), r[static_cast<size_t>(k)]);
    }
    TuckerTensor out;
    out.core = t;
    for (Index k = 0; k < d; ++k)
        out.core = mode_product(out.core, updated[static_cast<size_t>(k)].transpose(), k);
    out.factors = std::move(updated);
    return out;
}

TuckerTensor hooi_best_approx(const DenseTensor& t, const std::vector<Index>& r,
                              int max_sweeps, int restarts, std::uint64_t seed) {
    const Index d = t.order();
    if (static_cast<Index>(r.size()) != d)
        throw std::invalid_argument("hooi_best_approx: rank tuple order mismatch");
    if (max_sweeps < 1 || restarts < 1)
        throw std::invalid_argument("hooi_best_approx: max_sweeps and restarts must be >= 1");

    double best_obj = -1.0;
    std::vector<Matrix> best_factors;
    Rng base(seed);
    for (int rep = 0; rep < restarts; ++rep) {
        Rng rng = base.split(static_cast<std::uint64_t>(rep));
        std::vector<Matrix> factors(static_cast<size_t>(d));
        for (Index k = 0; k < d; ++k)
            factors[static_cast<size_t>(k)] =
                random_orthonormal(rng, t.extent(k), r[static_cast<size_t>(k)]);

        double prev_obj = -std::numeric_limits<double>::infinity();
        double obj = 0.0;
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            for (Index k = 0; k < d; ++k) {
                DenseTensor comp = t;
                for (Index j = 0; j < d; ++j) {
                    if (j == k) continue;
                    comp = mode_product(comp, factors[static_cast<size_t>(j)].transpose(), j);
                }
                factors[static_cast<size_t>(k)] = leading_left_singular_vectors(
                    matricize(comp, k), r[static_cast<size_t>(k)]);
            }
            DenseTensor core = t;
            for (Index k = 0; k < d; ++k)
                core = mode_product(core, factors[static_cast<size_t>(k)].transpose(), k);
            obj = frob_norm(core);
            if (obj - prev_obj < 1e-12) break;
            prev_obj = obj;
        }
        if (obj > best_obj) {
            best_obj = obj;
            best_factors = factors;
        }
    }
    TuckerTensor out;
    out.core = t;
    for (Index k = 0; k < d; ++k)
        out.core = mode_product(out.core, best_factors[static_cast<size_t>(k)].transpose(), k);
    out.factors = std::move(best_factors);
    return out;
}

TuckerTensor retract(const DenseTensor& z, const std::vector<Index>& r,
                     Retraction method) {
    switch (method) {
    case Retraction::THosvd:
        return thosvd(z, r);
    case Retraction::STHosvd:
        return sthosvd(z, r);
    case Retraction::MatrixSvd: {
        if (z.order() != 2)
            throw std::invalid_argument("retract: MatrixSvd requires an order-2 tensor");
        Eigen::Map<const Matrix> m(z.data().data(), z.extent(0), z.extent(1));
        TuckerTensor out;
        Matrix u = leading_left_singular_vectors(m, r[0]);
        // Right factor: leading right singular vectors, padded the same way.
        Matrix v = leading_left_singular_vectors(m.transpose(), r[1]);
        Matrix core = u.transpose() * m * v;
        out.core = DenseTensor::from_matrix(core);
        out.factors = {std::move(u), std::move(v)};
        return out;
    }
    }
    throw std::invalid_argument("retract: unknown method");
}

Matrix random_orthonormal(Rng& rng, Index p, Index r) {
    if (r < 1 || r > p) throw std::invalid_argument("random_orthonormal: invalid rank");
    Matrix g(p, r);
    for (Index j = 0; j < r; ++j)
        for (Index i = 0; i < p; ++i) g(i, j) = rng.normal();
    return qr_orthonormal(g);
}

Matrix qr_orthonormal(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), std::min(m.rows(), m.cols()));
    Matrix rfac = q.transpose() * m;
    for (Index j = 0; j < q.cols(); ++j)
        if (rfac(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

Matrix orthonormal_complement(const Matrix& u) {
    const Index p = u.rows();
    const Index r = u.cols();
    if (r >= p) return Matrix(p, 0);
    Eigen::HouseholderQR<Matrix> qr(u);
    Matrix qfull = qr.householderQ() * Matrix::Identity(p, p);
    return qfull.rightCols(p - r);
}

} // namespace totreg
