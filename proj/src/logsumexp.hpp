#pragma once

#include <cmath>
#include <limits>

namespace pcrf::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Running log-sum-exp accumulator with max rescaling.
class LogSumExp {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

}  // namespace pcrf::detail
