#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace eeqt {

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic (max CDF gap, ties handled).
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic 1% critical values: c(0.01) = sqrt(-ln(0.005)/2) ~ 1.628.
double ks_critical_1pct(std::size_t n);
double ks_critical_two_sample_1pct(std::size_t n, std::size_t m);

double exponential_cdf(double rate, double t);

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0;  // sample variance (n - 1)
    std::size_t n = 0;
};

MeanVar mean_variance(const std::vector<double>& xs);

}  // namespace eeqt
