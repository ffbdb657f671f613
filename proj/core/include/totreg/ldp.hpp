#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace totreg {

/// Probabilists' Hermite polynomial H_k(x) via the three-term recurrence
/// H_{k+1} = x H_k - k H_{k-1}. Degrees above 170 are rejected (factorial
/// overflow region).
double hermite(int k, double x);

/// h_k(x) = H_k(x) / sqrt(k!), computed with an incrementally normalized
/// recurrence so intermediate values stay bounded.
double normalized_hermite(int k, double x);

/// Joint Hermite-moment profile for (Y, X) ~ N(0, [1 u^T; u I_w]):
/// degree alpha on Y, degrees beta_j on the X_j, correlations u_j.
struct HermiteDegreeProfile {
    int alpha = 0;
    std::vector<int> beta;
    std::vector<double> u;
};

/// E[h_alpha(Y) prod_j h_{beta_j}(X_j)] in closed form:
/// sqrt(alpha!/prod beta_j!) * prod u_j^{beta_j} when alpha = sum beta_j,
/// else exactly 0. Log-space factorials keep large degrees stable.
double correlated_expectation(const HermiteDegreeProfile& p);

/// Monte-Carlo estimate of the same expectation, sampling Y as
/// sum u_j X_j + sqrt(1 - sum u_j^2) Z. Returns (mean, standard error).
std::pair<double, double> mc_verify_expectation(const HermiteDegreeProfile& p,
                                                std::int64_t samples,
                                                std::uint64_t seed);

/// Sample-size threshold (p/(d*D))^{d/2} * delta / (2(1 - sigma_sq)) below
/// which every degree-D polynomial test has advantage at most
/// delta/(1 - delta) for the rank-one planted model.
double ld_sample_threshold(double p, int d, int degree_d, double delta,
                           double sigma_sq);

struct GapRow {
    double p = 0.0;
    double statistical = 0.0;   // degrees-of-freedom proxy r* . p
    double algorithmic = 0.0;   // r* . p^{d/2} power-law proxy (constant-free)
    double ld_threshold = 0.0;  // hardness threshold at the given (D, delta)
};

/// One row per p: statistical sample-size proxy, algorithmic power-law
/// proxy, and the low-degree hardness threshold.
std::vector<GapRow> gap_table(const std::vector<double>& p_grid, int d,
                              double r_star, int degree_d, double delta,
                              double sigma_sq);

} // namespace totreg
