#include "totreg/ldp.hpp"

#include "totreg/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace totreg {

namespace {

constexpr int kMaxDegree = 170;

void check_degree(int k) {
    if (k < 0) throw std::invalid_argument("hermite: degree must be nonnegative");
    if (k > kMaxDegree) throw std::out_of_range("hermite: degree above 170 unsupported");
}

void check_profile(const HermiteDegreeProfile& p) {
    if (p.beta.size() != p.u.size() || p.u.empty())
        throw std::invalid_argument("profile: beta and u must have equal positive length");
    check_degree(p.alpha);
    double usq = 0.0;
    for (size_t j = 0; j < p.u.size(); ++j) {
        check_degree(p.beta[j]);
        if (std::abs(p.u[j]) >= 1.0)
            throw std::invalid_argument("profile: correlations must lie in (-1, 1)");
        usq += p.u[j] * p.u[j];
    }
    if (usq > 1.0 + 1e-12)
        throw std::invalid_argument("profile: sum of squared correlations exceeds 1");
}

} // namespace

double hermite(int k, double x) {
    check_degree(k);
    if (k == 0) return 1.0;
    double hm = 1.0, h = x;
    for (int j = 1; j < k; ++j) {
        const double next = x * h - static_cast<double>(j) * hm;
        hm = h;
        h = next;
    }
    return h;
}

double normalized_hermite(int k, double x) {
    check_degree(k);
    if (k == 0) return 1.0;
    // h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1)
    double hm = 1.0, h = x;
    for (int j = 1; j < k; ++j) {
        const double next =
            (x * h - std::sqrt(static_cast<double>(j)) * hm) /
            std::sqrt(static_cast<double>(j + 1));
        hm = h;
        h = next;
    }
    return h;
}

double correlated_expectation(const HermiteDegreeProfile& p) {
    check_profile(p);
    const long long beta_sum =
        std::accumulate(p.beta.begin(), p.beta.end(), 0LL);
    if (beta_sum != p.alpha) return 0.0;

    // log(alpha! / prod beta_j!) / 2 plus sum beta_j log|u_j|, sign tracked.
    double log_mag = 0.5 * std::lgamma(static_cast<double>(p.alpha) + 1.0);
    double sign = 1.0;
    for (size_t j = 0; j < p.beta.size(); ++j) {
        log_mag -= 0.5 * std::lgamma(static_cast<double>(p.beta[j]) + 1.0);
        if (p.beta[j] == 0) continue;
        if (p.u[j] == 0.0) return 0.0;
        log_mag += p.beta[j] * std::log(std::abs(p.u[j]));
        if (p.u[j] < 0.0 && (p.beta[j] % 2 != 0)) sign = -sign;
    }
    return sign * std::exp(log_mag);
}

std::pair<double, double> mc_verify_expectation(const HermiteDegreeProfile& p,
                                                std::int64_t samples,
                                                std::uint64_t seed) {
    check_profile(p);
    if (samples < 1000)
        throw std::invalid_argument("mc_verify_expectation: need at least 1000 samples");
    double usq = 0.0;
    for (double u : p.u) usq += u * u;
    const double tail = std::sqrt(std::max(0.0, 1.0 - usq));
    const size_t w = p.u.size();

    Rng rng(seed);
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t s = 0; s < samples; ++s) {
        double y = tail * rng.normal();
        double prod = 1.0;
        for (size_t j = 0; j < w; ++j) {
            const double xj = rng.normal();
            y += p.u[j] * xj;
            prod *= normalized_hermite(p.beta[j], xj);
        }
        const double v = normalized_hermite(p.alpha, y) * prod;
        sum += v;
        sumsq += v * v;
    }
    const double nn = static_cast<double>(samples);
    const double mean = sum / nn;
    const double var = std::max(0.0, sumsq / nn - mean * mean);
    return {mean, std::sqrt(var / nn)};
}

double ld_sample_threshold(double p, int d, int degree_d, double delta,
                           double sigma_sq) {
    if (p < 1.0 || d < 1 || degree_d < 1)
        throw std::invalid_argument("ld_sample_threshold: p, d, D must be >= 1");
    if (delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("ld_sample_threshold: delta must lie in (0, 1)");
    if (sigma_sq < 0.0 || sigma_sq >= 1.0)
        throw std::invalid_argument("ld_sample_threshold: sigma_sq must lie in [0, 1)");
    const double base = p / (static_cast<double>(d) * degree_d);
    return std::pow(base, 0.5 * d) * delta / (2.0 * (1.0 - sigma_sq));
}

std::vector<GapRow> gap_table(const std::vector<double>& p_grid, int d,
                              double r_star, int degree_d, double delta,
                              double sigma_sq) {
    if (p_grid.empty())
        throw std::invalid_argument("gap_table: p grid must be nonempty");
    if (r_star < 1.0)
        throw std::invalid_argument("gap_table: r_star must be >= 1");
    std::vector<GapRow> rows;
    rows.reserve(p_grid.size());
    for (double p : p_grid) {
        GapRow row;
        row.p = p;
        row.statistical = r_star * p;
        row.algorithmic = r_star * std::pow(p, 0.5 * d);
        row.ld_threshold = ld_sample_threshold(p, d, degree_d, delta, sigma_sq);
        rows.push_back(row);
    }
    return rows;
}

} // namespace totreg
