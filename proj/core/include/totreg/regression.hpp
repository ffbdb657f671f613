#pragma once

#include "totreg/rng.hpp"
#include "totreg/tensor.hpp"
#include "totreg/tucker.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace totreg {

enum class DesignKind { General, Vector, MatrixTrace };

/// Linear measurement operator. Every kind is stored as one n x q matrix
/// whose row i is the flattened covariate (q = product of the first d
/// ambient extents; for the vector kind q = p_1). `scale` multiplies every
/// measurement; instance generators set it to 1/sqrt(n) so the operator is
/// near-isometric on low-rank tensors.
struct LinearDesign {
    DesignKind kind = DesignKind::General;
    Matrix a;                          // n x q, row i = vec(A_i)
    std::vector<Index> covariate_shape; // (p_1,...,p_d)
    Index d = 0;
    Index m = 0;
    double scale = 1.0;

    Index n() const { return a.rows(); }

    /// Covariate i as a tensor (copy of row i reshaped).
    DenseTensor covariate(Index i) const;

    void validate() const;
};

/// Shape of apply()'s output for a regressor of the given ambient shape:
/// (n) when m = 0, else (n, p_{d+1},...,p_{d+m}).
std::vector<Index> observation_shape(const LinearDesign& design,
                                     const std::vector<Index>& ambient);

/// y[i,...] = scale * <A_i, x>_* contracted over the first d modes.
DenseTensor apply(const LinearDesign& design, const DenseTensor& x);

/// Adjoint of apply: <apply(z1), z2> = <z1, adjoint(z2)>.
DenseTensor adjoint(const LinearDesign& design, const DenseTensor& r);

struct ProblemInstance {
    LinearDesign design;
    DenseTensor observations; // shape observation_shape(design, ambient)
    std::optional<TuckerTensor> ground_truth;
    double noise_sigma = 0.0;

    std::vector<Index> ambient_shape() const;
};

/// Synthetic Gaussian-ensemble instance: ground truth S x_k U_k with
/// N(0,1) core entries and uniformly random orthonormal factors, N(0,1)
/// covariate entries with design.scale = 1/sqrt(n), observations
/// apply(X*) + scale * eps with eps entries N(0, sigma^2). Deterministic
/// in the seed.
ProblemInstance generate_gaussian_instance(const std::vector<Index>& dims,
                                           Index d, Index m,
                                           const std::vector<Index>& r_star,
                                           double sigma, Index n,
                                           std::uint64_t seed,
                                           DesignKind kind = DesignKind::General);

/// Samples `trials` random unit-Frobenius Tucker rank-<=r tensors and
/// returns (min, max) of ||apply(z)||_F^2. The empirical restricted
/// isometry constant max(1 - min, max - 1) is a lower bound on the true
/// one: sampling cannot certify the supremum. `trailing` gives the
/// ambient extents of the m response modes (empty when m = 0).
std::pair<double, double> estimate_trip(const LinearDesign& design,
                                        const std::vector<Index>& r,
                                        int trials, std::uint64_t seed,
                                        const std::vector<Index>& trailing = {});

} // namespace totreg
