#include "evmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evmc {

MeanError blocked_mean(std::span<const double> xs,
                       std::span<const std::size_t> block_starts) {
  MeanError out;
  out.mean = compensated_mean(xs);
  std::size_t nb = block_starts.size();
  if (nb < 2) return blocked_mean_uniform(xs);
  std::vector<double> block_means;
  block_means.reserve(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    std::size_t lo = block_starts[b];
    std::size_t hi = (b + 1 < nb) ? block_starts[b + 1] : xs.size();
    if (hi <= lo) continue;
    block_means.push_back(compensated_mean(xs.subspan(lo, hi - lo)));
  }
  if (block_means.size() < 2) return out;
  double var = compensated_variance(block_means);
  out.sigma = std::sqrt(var / static_cast<double>(block_means.size() - 1));
  return out;
}

MeanError blocked_mean_uniform(std::span<const double> xs,
                               std::size_t nblocks) {
  std::vector<std::size_t> starts;
  nblocks = std::max<std::size_t>(2, std::min(nblocks, xs.size()));
  for (std::size_t b = 0; b < nblocks; ++b)
    starts.push_back(b * xs.size() / nblocks);
  MeanError out;
  out.mean = compensated_mean(xs);
  std::vector<double> block_means;
  for (std::size_t b = 0; b < nblocks; ++b) {
    std::size_t lo = starts[b];
    std::size_t hi = (b + 1 < nblocks) ? starts[b + 1] : xs.size();
    if (hi > lo) block_means.push_back(compensated_mean(xs.subspan(lo, hi - lo)));
  }
  if (block_means.size() >= 2) {
    double var = compensated_variance(block_means);
    out.sigma = std::sqrt(var / static_cast<double>(block_means.size() - 1));
  }
  return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("pearson: need two equal-length series");
  double mx = compensated_mean(xs), my = compensated_mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {
std::vector<double> ranks(std::span<const double> xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank of tie group
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
  auto rx = ranks(xs);
  auto ry = ranks(ys);
  return pearson(rx, ry);
}

namespace {
// Regularized upper incomplete gamma Q(a, x), series + continued fraction.
double gamma_q(double a, double x) {
  if (x < 0 || a <= 0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0) return 1.0;
  double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) by series, Q = 1 - P
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Q(a,x) by Lentz continued fraction
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}
}  // namespace

double chi_square_pvalue(double statistic, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi_square_pvalue: dof <= 0");
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_line: need two equal-length series");
  double mx = compensated_mean(xs), my = compensated_mean(ys);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace evmc
