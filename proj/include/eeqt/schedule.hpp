#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "eeqt/errors.hpp"

namespace eeqt {

/// Piecewise-constant function of time. Either a single constant value, or a
/// list of strictly ascending breakpoints with one value per right-open
/// interval [b_i, b_{i+1}); the last value extends to +inf. Evaluation before
/// the first breakpoint clamps to the first value (runs start at t=0 and
/// configs put their first breakpoint there).
///
/// Integrators align step boundaries with breakpoints and evaluate schedules
/// at the step start, so a step never straddles two values.
template <typename T>
class Schedule {
  public:
    Schedule() = default;

    explicit Schedule(T constant) : values_{std::move(constant)} {}

    Schedule(std::vector<double> breakpoints, std::vector<T> values)
        : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
        if (values_.empty()) throw Error("schedule: needs at least one value");
        if (breakpoints_.size() != values_.size())
            throw Error("schedule: breakpoint and value counts differ");
        for (std::size_t i = 1; i < breakpoints_.size(); ++i)
            if (!(breakpoints_[i - 1] < breakpoints_[i]))
                throw Error("schedule: breakpoints must be strictly ascending");
    }

    bool is_constant() const { return breakpoints_.empty(); }

    const T& at(double t) const { return values_[interval_index(t)]; }

    std::size_t interval_index(double t) const {
        if (breakpoints_.empty()) return 0;
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        if (it == breakpoints_.begin()) return 0;
        return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    }

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<T>& values() const { return values_; }

  private:
    std::vector<double> breakpoints_;  // empty for a constant
    std::vector<T> values_;
};

}  // namespace eeqt
