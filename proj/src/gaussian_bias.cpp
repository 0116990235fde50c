#include "biaslab/gaussian_bias.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace biaslab {

namespace {

void require_theta(double theta) {
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
        throw std::domain_error("theta must be a finite non-negative real");
    }
}

// Lower-triangular factor of the exchangeable correlation matrix. Zero
// pivots (rho == 1) are allowed; negative ones mean the matrix is not PSD.
using Factor = std::array<std::array<double, 3>, 3>;

Factor correlation_factor(std::size_t dim, double rho) {
    constexpr double kPivotTolerance = 1e-12;
    Factor corr{};
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            corr[i][j] = (i == j) ? 1.0 : rho;
        }
    }
    Factor l{};
    for (std::size_t j = 0; j < dim; ++j) {
        double pivot = corr[j][j];
        for (std::size_t k = 0; k < j; ++k) {
            pivot -= l[j][k] * l[j][k];
        }
        if (pivot < -kPivotTolerance) {
            throw std::domain_error("correlation matrix is not positive semidefinite");
        }
        const double diag = pivot > kPivotTolerance ? std::sqrt(pivot) : 0.0;
        l[j][j] = diag;
        for (std::size_t i = j + 1; i < dim; ++i) {
            double v = corr[i][j];
            for (std::size_t k = 0; k < j; ++k) {
                v -= l[i][k] * l[j][k];
            }
            if (diag == 0.0) {
                if (std::abs(v) > 1e-9) {
                    throw std::domain_error("correlation matrix is not positive semidefinite");
                }
                l[i][j] = 0.0;
            } else {
                l[i][j] = v / diag;
            }
        }
    }
    return l;
}

double evaluate(const StatisticRequest& req, const std::array<double, 3>& x) {
    switch (req.kind) {
        case OrderStatistic::Single:
            return x[0];
        case OrderStatistic::Min2:
            return std::min(x[0], x[1]);
        case OrderStatistic::Max2:
            return std::max(x[0], x[1]);
        case OrderStatistic::Max3:
            return std::max({x[0], x[1], x[2]});
        case OrderStatistic::MinMax:
            return std::min(std::max(x[0], x[1]), x[2]);
        case OrderStatistic::WeightedTwin:
            return req.beta * std::min(x[0], x[1]) + (1.0 - req.beta) * 0.5 * (x[0] + x[1]);
        case OrderStatistic::WeightedThird:
            return req.beta * std::min(x[0], x[1]) + (1.0 - req.beta) * x[2];
    }
    return 0.0;
}

}  // namespace

CorrelatedGaussianSpec CorrelatedGaussianSpec::make(std::vector<double> mu, std::vector<double> sigma,
                                                    double rho) {
    CorrelatedGaussianSpec spec{std::move(mu), std::move(sigma), rho};
    spec.validate();
    return spec;
}

void CorrelatedGaussianSpec::validate() const {
    if (mu.size() != sigma.size()) {
        throw std::domain_error("mu and sigma must have equal length");
    }
    if (mu.size() != 2 && mu.size() != 3) {
        throw std::domain_error("spec must describe 2 or 3 variables");
    }
    for (double s : sigma) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw std::domain_error("sigma entries must be finite and strictly positive");
        }
    }
    for (double m : mu) {
        if (!std::isfinite(m)) {
            throw std::domain_error("mu entries must be finite");
        }
    }
    if (!(rho >= -1.0 && rho <= 1.0)) {
        throw std::domain_error("rho must lie in [-1, 1]");
    }
}

double theta_of(double s1, double s2, double rho) {
    if (!(s1 > 0.0) || !(s2 > 0.0)) {
        throw std::domain_error("theta_of: sigmas must be strictly positive");
    }
    if (!(rho >= -1.0 && rho <= 1.0)) {
        throw std::domain_error("theta_of: rho must lie in [-1, 1]");
    }
    // Rounding can push the radicand a hair below zero at rho == 1.
    const double radicand = s1 * s1 + s2 * s2 - 2.0 * rho * s1 * s2;
    return std::sqrt(std::max(radicand, 0.0));
}

double std_normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / kSqrtTwoPi;
}

double std_normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double expected_min2(const CorrelatedGaussianSpec& spec) {
    spec.validate();
    if (spec.size() != 2) {
        throw std::domain_error("expected_min2 needs exactly 2 variables");
    }
    const double mu1 = spec.mu[0];
    const double mu2 = spec.mu[1];
    const double theta = theta_of(spec.sigma[0], spec.sigma[1], spec.rho);
    if (theta == 0.0) {
        return std::min(mu1, mu2);
    }
    // The weight on mu1 is the probability that N1 is the smaller one.
    const double z = (mu1 - mu2) / theta;
    return mu2 + (mu1 - mu2) * std_normal_cdf(-z) - theta * std_normal_pdf(z);
}

double expected_max2(const CorrelatedGaussianSpec& spec) {
    spec.validate();
    if (spec.size() != 2) {
        throw std::domain_error("expected_max2 needs exactly 2 variables");
    }
    // min + max = N1 + N2 pointwise.
    return spec.mu[0] + spec.mu[1] - expected_min2(spec);
}

double expected_min2_equal_means(double mu, double theta) {
    require_theta(theta);
    return mu - theta / kSqrtTwoPi;
}

double expected_max2_equal_means(double mu, double theta) {
    require_theta(theta);
    return mu + theta / kSqrtTwoPi;
}

double expected_max3_equal_means(double mu, double theta) {
    require_theta(theta);
    return mu + 3.0 * theta / (2.0 * kSqrtTwoPi);
}

double expected_tcu_error(double mu, double theta) {
    require_theta(theta);
    return mu - theta / (2.0 * kSqrtTwoPi);
}

double expected_weighted_error(double beta, double mu, double theta) {
    require_theta(theta);
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw std::domain_error("beta must lie in [0, 1]");
    }
    return mu - beta * theta / kSqrtTwoPi;
}

std::size_t arity(OrderStatistic kind) noexcept {
    switch (kind) {
        case OrderStatistic::Single:
            return 1;
        case OrderStatistic::Min2:
        case OrderStatistic::Max2:
        case OrderStatistic::WeightedTwin:
            return 2;
        case OrderStatistic::Max3:
        case OrderStatistic::MinMax:
        case OrderStatistic::WeightedThird:
            return 3;
    }
    return 0;
}

std::string to_string(OrderStatistic kind) {
    switch (kind) {
        case OrderStatistic::Single: return "single";
        case OrderStatistic::Min2: return "min2";
        case OrderStatistic::Max2: return "max2";
        case OrderStatistic::Max3: return "max3";
        case OrderStatistic::MinMax: return "min_max";
        case OrderStatistic::WeightedTwin: return "weighted_twin";
        case OrderStatistic::WeightedThird: return "weighted_third";
    }
    return "unknown";
}

McEstimate mc_order_stat_oracle(const CorrelatedGaussianSpec& spec, StatisticRequest statistic,
                                std::uint64_t n, std::uint64_t seed) {
    return mc_order_stat_oracle(spec, std::vector<StatisticRequest>{statistic}, n, seed).front();
}

std::vector<McEstimate> mc_order_stat_oracle(const CorrelatedGaussianSpec& spec,
                                             const std::vector<StatisticRequest>& statistics,
                                             std::uint64_t n, std::uint64_t seed) {
    spec.validate();
    if (n < 10000) {
        throw std::domain_error("mc_order_stat_oracle needs at least 10^4 draws");
    }
    const std::size_t dim = spec.size();
    for (const auto& s : statistics) {
        if (arity(s.kind) > dim) {
            throw std::domain_error("statistic " + to_string(s.kind) + " needs more variables than the spec has");
        }
        if ((s.kind == OrderStatistic::WeightedTwin || s.kind == OrderStatistic::WeightedThird) &&
            !(s.beta >= 0.0 && s.beta <= 1.0)) {
            throw std::domain_error("beta must lie in [0, 1]");
        }
    }
    const Factor l = correlation_factor(dim, spec.rho);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Welford accumulators, one per statistic.
    const std::size_t m = statistics.size();
    std::vector<double> mean(m, 0.0), m2(m, 0.0);
    std::array<double, 3> z{}, x{};
    for (std::uint64_t draw = 0; draw < n; ++draw) {
        for (std::size_t i = 0; i < dim; ++i) {
            z[i] = normal(rng);
        }
        for (std::size_t i = 0; i < dim; ++i) {
            double mixed = 0.0;
            for (std::size_t k = 0; k <= i; ++k) {
                mixed += l[i][k] * z[k];
            }
            x[i] = spec.mu[i] + spec.sigma[i] * mixed;
        }
        const double count = static_cast<double>(draw + 1);
        for (std::size_t s = 0; s < m; ++s) {
            const double v = evaluate(statistics[s], x);
            const double delta = v - mean[s];
            mean[s] += delta / count;
            m2[s] += delta * (v - mean[s]);
        }
    }

    std::vector<McEstimate> out(m);
    const double nd = static_cast<double>(n);
    for (std::size_t s = 0; s < m; ++s) {
        const double variance = m2[s] / (nd - 1.0);
        out[s] = McEstimate{mean[s], std::sqrt(variance / nd)};
    }
    return out;
}

}  // namespace biaslab
