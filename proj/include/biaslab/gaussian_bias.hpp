#pragma once

// Expected estimation errors of critic-target rules under a correlated
// Gaussian error model, plus a Monte Carlo oracle used to check them.
//
// Each critic's error Q_i(s,a) - Q*(s,a) is modelled as N_i ~ N(mu_i, sigma_i)
// with a common pairwise correlation rho. The pooled deviation
//   theta = sqrt(sigma_1^2 + sigma_2^2 - 2 rho sigma_1 sigma_2)
// is the standard deviation of N_1 - N_2 and drives every closed form below.

#include <cstdint>
#include <string>
#include <vector>

namespace biaslab {

/// Means, standard deviations and common pairwise correlation of 2 or 3
/// critic errors. Construct through make() to get validation.
struct CorrelatedGaussianSpec {
    std::vector<double> mu;
    std::vector<double> sigma;
    double rho = 0.0;

    /// Throws std::domain_error on a non-positive sigma, rho outside
    /// [-1, 1], mismatched lengths, or a length other than 2 or 3.
    static CorrelatedGaussianSpec make(std::vector<double> mu, std::vector<double> sigma, double rho);

    void validate() const;
    std::size_t size() const noexcept { return mu.size(); }
};

struct BiasReport {
    std::string rule_name;
    double expected_error = 0.0;
    double theta = 0.0;
};

inline constexpr double kSqrtTwoPi = 2.50662827463100050241576528481104525;

double theta_of(double s1, double s2, double rho);

double std_normal_pdf(double x) noexcept;
double std_normal_cdf(double x) noexcept;

/// E[min(N1, N2)] for a two-entry spec with arbitrary means. Falls back to
/// min(mu1, mu2) when theta == 0.
double expected_min2(const CorrelatedGaussianSpec& spec);

/// E[max(N1, N2)], the mirror image of expected_min2.
double expected_max2(const CorrelatedGaussianSpec& spec);

double expected_min2_equal_means(double mu, double theta);
double expected_max2_equal_means(double mu, double theta);
/// Equal means and equal pairwise theta for all three pairs.
double expected_max3_equal_means(double mu, double theta);
/// E[min(max(N1, N2), N3)] with equal means and equal pairwise theta.
double expected_tcu_error(double mu, double theta);
/// mu - beta * theta / sqrt(2 pi); shared by the weighted-twin and
/// third-critic-average rules, and by a fixed-beta stochastic twin target.
double expected_weighted_error(double beta, double mu, double theta);

enum class OrderStatistic {
    Single,          // N1
    Min2,            // min(N1, N2)
    Max2,            // max(N1, N2)
    Max3,            // max(N1, N2, N3)
    MinMax,          // min(max(N1, N2), N3)
    WeightedTwin,    // beta min(N1, N2) + (1 - beta)(N1 + N2) / 2
    WeightedThird,   // beta min(N1, N2) + (1 - beta) N3
};

struct StatisticRequest {
    OrderStatistic kind = OrderStatistic::Min2;
    double beta = 0.0;  // only read by the weighted statistics
};

std::size_t arity(OrderStatistic kind) noexcept;
std::string to_string(OrderStatistic kind);

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Sample mean and standard error of a statistic over n correlated draws.
/// Deterministic for a given seed. Requires n >= 10^4 and spec.size() equal
/// to the statistic's arity (a 3-entry spec is accepted for 2-ary
/// statistics; only the leading entries are used).
McEstimate mc_order_stat_oracle(const CorrelatedGaussianSpec& spec, StatisticRequest statistic,
                                std::uint64_t n, std::uint64_t seed);

/// Evaluates several statistics on one shared stream of draws. Element i of
/// the result matches mc_order_stat_oracle(spec, statistics[i], n, seed).
std::vector<McEstimate> mc_order_stat_oracle(const CorrelatedGaussianSpec& spec,
                                             const std::vector<StatisticRequest>& statistics,
                                             std::uint64_t n, std::uint64_t seed);

}  // namespace biaslab
