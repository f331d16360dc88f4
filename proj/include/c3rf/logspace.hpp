#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace c3rf {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline bool is_neg_inf(double x) { return std::isinf(x) && x < 0.0; }

// Streaming log-sum-exp. -inf terms are dropped, so the result over an empty
// or all-forbidden stream is -inf. The accumulation is deterministic in the
// order terms are fed, which several callers rely on for reproducibility.
class LogSumAccumulator {
 public:
  void add(double log_term) {
    if (is_neg_inf(log_term)) return;
    if (empty_) {
      max_ = log_term;
      sum_ = 1.0;
      empty_ = false;
      return;
    }
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }

  bool empty() const { return empty_; }

  double value() const { return empty_ ? kNegInf : max_ + std::log(sum_); }

  // log of the arithmetic mean of n exponentiated terms; exact (returns the
  // common value) when all n terms are identical.
  double mean_value(std::size_t n) const {
    return empty_ ? kNegInf : max_ + std::log(sum_ / static_cast<double>(n));
  }

 private:
  double max_ = 0.0;
  double sum_ = 0.0;
  bool empty_ = true;
};

inline double log_sum_exp(const std::vector<double>& v) {
  LogSumAccumulator acc;
  for (double x : v) acc.add(x);
  return acc.value();
}

}  // namespace c3rf
