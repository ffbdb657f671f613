#pragma once

#include "totreg/rng.hpp"
#include "totreg/tensor.hpp"

#include <vector>

namespace totreg {

/// Tucker-form tensor: core of shape (r_1,...,r_D) and per-mode factors
/// U_k in R^{p_k x r_k} with orthonormal columns.
struct TuckerTensor {
    DenseTensor core;
    std::vector<Matrix> factors;

    Index order() const { return core.order(); }
    std::vector<Index> ambient_shape() const;
    std::vector<Index> ranks() const { return core.shape(); }

    /// core x_1 U_1 x ... x_D U_D.
    DenseTensor dense() const;

    /// Checks factor orthonormality (1e-10) and extent compatibility.
    void validate() const;
};

/// Top-r singular triplet with deterministic sign: the largest-magnitude
/// entry of each left singular vector is positive (ties by lowest index).
struct TruncatedSVD {
    Matrix u;  // rows x r, orthonormal columns
    Vector s;  // nonincreasing, nonnegative
    Matrix v;  // cols x r, orthonormal columns
};

TruncatedSVD truncated_svd(const Matrix& m, Index r);

/// Leading r left singular vectors, sign-fixed. When r exceeds the matrix
/// rank the factor is padded with deterministically ordered null-space
/// columns of the full decomposition; requires r <= rows(m).
Matrix leading_left_singular_vectors(const Matrix& m, Index r);

/// Per-mode truncated SVDs of the matricizations; core = t x_k U_k^T.
TuckerTensor thosvd(const DenseTensor& t, const std::vector<Index>& r);

/// As thosvd, but each mode's SVD is taken on the sequentially compressed
/// tensor, truncation order mode 1 -> mode D.
TuckerTensor sthosvd(const DenseTensor& t, const std::vector<Index>& r);

/// One-iteration higher-order orthogonal iteration. With inplace=true
/// (default) modes j<k use the already-updated factors within the sweep;
/// with inplace=false the input factors serve on both sides of mode k,
/// which is what the spectral initializations use.
TuckerTensor ohooi(const DenseTensor& t, const std::vector<Matrix>& init_factors,
                   const std::vector<Index>& r, bool inplace = true);

/// Restarted HOOI run to stationarity; surrogate for the best Tucker
/// rank-r approximation. Deterministic: best objective wins, ties broken
/// by restart index.
TuckerTensor hooi_best_approx(const DenseTensor& t, const std::vector<Index>& r,
                              int max_sweeps = 100, int restarts = 10,
                              std::uint64_t seed = 0);

enum class Retraction { THosvd, STHosvd, MatrixSvd };

/// Retraction onto the Tucker rank-<=r set. MatrixSvd is only valid for
/// order-2 inputs, where it is the exact best approximation.
TuckerTensor retract(const DenseTensor& z, const std::vector<Index>& r,
                     Retraction method);

/// Haar-distributed orthonormal p x r matrix (QR of a Gaussian matrix with
/// the R-diagonal sign fix).
Matrix random_orthonormal(Rng& rng, Index p, Index r);

/// Thin-QR Q factor with nonnegative R diagonal.
Matrix qr_orthonormal(const Matrix& m);

/// Orthonormal complement columns of a column-orthonormal U (p x (p-r)).
Matrix orthonormal_complement(const Matrix& u);

} // namespace totreg
