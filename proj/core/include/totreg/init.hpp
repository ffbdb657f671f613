#pragma once

#include "totreg/regression.hpp"
#include "totreg/tucker.hpp"

#include <vector>

namespace totreg {

/// Spectral initialization for scalar responses (m = 0): per-mode SVDs of
/// the back-projected observations followed by one HOOI sweep. With
/// hooi_inplace the sweep reuses already-updated factors for earlier modes.
TuckerTensor init_scalar_on_tensor(const ProblemInstance& instance,
                                   const std::vector<Index>& r,
                                   bool hooi_inplace = false);

/// Spectral initialization for vector covariates: whitens the covariate
/// matrix by its QR factor, initializes on the rotated observations, and
/// undoes the mode-1 change of variables by back-substitution with R.
/// Requires a full-column-rank covariate matrix (n >= p_1).
TuckerTensor init_tensor_on_vector(const ProblemInstance& instance,
                                   const std::vector<Index>& r,
                                   bool hooi_inplace = false);

/// Matrix initialization (d = 2, m = 0): rank-r truncated SVD of the
/// back-projected observations.
TuckerTensor init_matrix_trace(const ProblemInstance& instance,
                               const std::vector<Index>& r);

/// Dispatches on the design kind (matrix-trace designs use the SVD path).
TuckerTensor initialize(const ProblemInstance& instance,
                        const std::vector<Index>& r, bool hooi_inplace = false);

} // namespace totreg
