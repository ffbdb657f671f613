#pragma once

#include "totreg/manifold.hpp"
#include "totreg/regression.hpp"
#include "totreg/tucker.hpp"

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace totreg {

enum class Algorithm { Rgd, Rgn, Pgd, FactoredGd };

enum class Termination { TolReached, MaxIters, Degenerate, NumericalFailure };

struct SolverConfig {
    Algorithm algorithm = Algorithm::Rgn;
    std::vector<Index> input_rank;
    int max_iters = 300;
    double tol_rel_rmse = 1e-13;
    Retraction retraction = Retraction::STHosvd;
    /// Stepsize grid for the baselines. Applied to the 1/sqrt(n)-scaled
    /// operator these match a 1/n-scaled grid for raw unit-variance designs.
    std::vector<double> baseline_stepsizes{0.1, 0.25, 0.5, 0.75, 1.0};
    /// Conditioning threshold below which Gauss-Newton systems get a ridge term.
    double ridge_eps = 1e-12;
};

struct IterRecord {
    int iter = 0;
    double rel_rmse = std::numeric_limits<double>::quiet_NaN(); // NaN without ground truth
    double loss = 0.0;
    double stepsize = 0.0;
    std::int64_t elapsed_ns = 0;
};

struct RunTrace {
    std::vector<IterRecord> records;
    Termination reason = Termination::MaxIters;
    bool diverged = false; // baseline loss exceeded 1e6 x initial
};

/// Half squared residual norm at the dense point x.
double loss(const ProblemInstance& instance, const DenseTensor& x);

/// Tangent projection of the ambient least-squares gradient at x.
DenseTensor riemannian_gradient(const ProblemInstance& instance,
                                const TuckerTensor& x);
DenseTensor riemannian_gradient(const ProblemInstance& instance, const Gauge& g);

/// One steepest-descent step with the exact line-search stepsize
/// ||g||^2 / ||apply(g)||^2; returns the retracted point and the stepsize
/// (0 when the gradient norm is below 1e-15 x ||observations||).
std::pair<TuckerTensor, double> rgd_step(const ProblemInstance& instance,
                                         const TuckerTensor& x,
                                         const SolverConfig& cfg);

/// One Gauss-Newton step: minimizes ||Y - apply(P_T(X + eta))|| over the
/// tangent space via one joint least squares for the core block and the
/// covariate-mode blocks plus one independent multi-RHS system per
/// response mode, then retracts.
TuckerTensor rgn_step(const ProblemInstance& instance, const TuckerTensor& x,
                      const SolverConfig& cfg);

/// Gauss-Newton step for the vector-covariate model in closed form
/// (requires full-column-rank A); agrees with rgn_step.
TuckerTensor rgn_step_vector_closed_form(const ProblemInstance& instance,
                                         const TuckerTensor& x,
                                         const SolverConfig& cfg);

/// Ambient gradient step followed by retraction to rank r.
TuckerTensor pgd_step(const ProblemInstance& instance, const TuckerTensor& x,
                      double stepsize, const SolverConfig& cfg);

/// Unconstrained Tucker factorization state for plain gradient descent;
/// factors are not kept orthonormal.
struct FactoredState {
    DenseTensor core;
    std::vector<Matrix> factors;

    DenseTensor dense() const;
};

FactoredState factored_gd_step(const ProblemInstance& instance,
                               const FactoredState& s, double stepsize);

/// Runs the configured algorithm from x0, recording one trace row per
/// iteration (row 0 is the initial point). Stops on the error tolerance
/// (relative RMSE when ground truth is present, else relative loss
/// change), the iteration cap, or a degenerate/numerically failed step;
/// step failures set the termination reason instead of propagating.
/// The baselines run once per grid stepsize and keep the best final error.
std::pair<TuckerTensor, RunTrace> solve(const ProblemInstance& instance,
                                        const SolverConfig& cfg,
                                        const TuckerTensor& x0);

} // namespace totreg
