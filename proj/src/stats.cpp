#include "eeqt/stats.hpp"

#include <algorithm>
#include <cmath>

#include "eeqt/errors.hpp"

namespace eeqt {

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw Error("ks_statistic: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - f,
                                 f - static_cast<double>(i) / n));
    }
    return d;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("ks_statistic_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (i == a.size())
            x = b[j];
        else if (j == b.size())
            x = a[i];
        else
            x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

namespace {
// sqrt(-ln(alpha/2)/2) at alpha = 0.01
const double kC1pct = std::sqrt(-0.5 * std::log(0.005));
}  // namespace

double ks_critical_1pct(std::size_t n) {
    return kC1pct / std::sqrt(static_cast<double>(n));
}

double ks_critical_two_sample_1pct(std::size_t n, std::size_t m) {
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    return kC1pct * std::sqrt((nn + mm) / (nn * mm));
}

double exponential_cdf(double rate, double t) {
    return t <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * t);
}

MeanVar mean_variance(const std::vector<double>& xs) {
    MeanVar mv;
    mv.n = xs.size();
    if (xs.empty()) return mv;
    double sum = 0.0;
    for (double x : xs) sum += x;
    mv.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - mv.mean) * (x - mv.mean);
        mv.variance = ss / static_cast<double>(xs.size() - 1);
    }
    return mv;
}

}  // namespace eeqt
