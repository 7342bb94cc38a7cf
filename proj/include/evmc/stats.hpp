#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace evmc {

/// Compensated (Kahan) summation. Accumulation order is fixed by the caller,
/// so gathered per-chain results reduce identically across worker layouts.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline double compensated_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

inline double compensated_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double m = compensated_mean(xs);
  KahanSum s;
  for (double x : xs) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(xs.size());
}

struct MeanError {
  double mean = 0.0;
  double sigma = 0.0;  // 1-sigma statistical error
};

/// Error bar from blocking: one block per chain when chain boundaries are
/// known, otherwise `nblocks` contiguous blocks.
MeanError blocked_mean(std::span<const double> xs,
                       std::span<const std::size_t> block_starts);

MeanError blocked_mean_uniform(std::span<const double> xs,
                               std::size_t nblocks = 8);

/// Pearson correlation coefficient.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Spearman rank correlation.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Upper tail probability of the chi-square distribution with k dof,
/// Q(k/2, x/2) via the regularized incomplete gamma function.
double chi_square_pvalue(double statistic, int dof);

/// Least-squares slope/intercept of y against x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

}  // namespace evmc
