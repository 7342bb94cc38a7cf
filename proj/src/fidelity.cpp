#include "evmc/fidelity.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "evmc/stats.hpp"

namespace evmc::fidelity {

namespace {

Matrix chi_from_rows(const Matrix& re, const Matrix& im) {
  Matrix cre = re.rowwise() - re.colwise().mean();
  Matrix cim = im.rowwise() - im.colwise().mean();
  const double m = static_cast<double>(re.rows());
  return (cre.transpose() * cre + cim.transpose() * cim) / m;
}

double leading_eigenvalue(const Matrix& chi) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(chi);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

}  // namespace

ChiEstimate chi_matrix(const Matrix& coup_re, const Matrix& coup_im,
                       const std::vector<std::size_t>& chain_starts) {
  check(coup_re.rows() > 1, "chi: need at least two samples");
  check(coup_re.rows() == coup_im.rows() && coup_re.cols() == coup_im.cols(),
        "chi: mismatched jacobian parts");
  ChiEstimate out;
  out.chi = chi_from_rows(coup_re, coup_im);
  out.chi = 0.5 * (out.chi + out.chi.transpose()).eval();  // enforce exact symmetry

  const int nb = static_cast<int>(chain_starts.size());
  out.lambda_sigma = 0.0;
  if (nb >= 2) {
    std::vector<double> loo;
    for (int b = 0; b < nb; ++b) {
      std::size_t lo = chain_starts[static_cast<std::size_t>(b)];
      std::size_t hi = (b + 1 < nb) ? chain_starts[static_cast<std::size_t>(b) + 1]
                                    : static_cast<std::size_t>(coup_re.rows());
      const auto rows = static_cast<Eigen::Index>(coup_re.rows());
      const auto cnt = static_cast<Eigen::Index>(hi - lo);
      if (cnt <= 0 || cnt == rows) continue;
      Matrix re(rows - cnt, coup_re.cols());
      Matrix im(rows - cnt, coup_im.cols());
      re << coup_re.topRows(static_cast<Eigen::Index>(lo)),
          coup_re.bottomRows(rows - static_cast<Eigen::Index>(hi));
      im << coup_im.topRows(static_cast<Eigen::Index>(lo)),
          coup_im.bottomRows(rows - static_cast<Eigen::Index>(hi));
      loo.push_back(leading_eigenvalue(chi_from_rows(re, im)));
    }
    if (loo.size() >= 2) {
      double m = compensated_mean(loo);
      double ss = 0.0;
      for (double v : loo) ss += (v - m) * (v - m);
      double n = static_cast<double>(loo.size());
      out.lambda_sigma = std::sqrt((n - 1.0) / n * ss);
    }
  }
  return out;
}

ChiEstimate chi(const WaveFunction& model, const HamiltonianFamily& family,
                const CouplingVector& gamma, const SamplerConfig& sampler) {
  auto batches = run_chains(
      family, {gamma}, sampler,
      [&](const SpinConfiguration& s, const CouplingVector& g) {
        return model.log_psi(s, g);
      });
  const SystemBatch& batch = batches[0];
  std::vector<std::pair<const SpinConfiguration*, const CouplingVector*>> refs;
  refs.reserve(batch.samples.size());
  for (const auto& s : batch.samples) refs.push_back({&s, &gamma});
  auto jac = model.amplitude_jacobians(refs);
  return chi_matrix(jac.coup_re, jac.coup_im, batch.chain_starts);
}

LeadingDirection leading_direction(const Matrix& chi, double tie_tol) {
  check(chi.rows() == chi.cols() && chi.rows() >= 1, "leading_direction: square matrix");
  if (!chi.allFinite())
    throw NumericsError("leading_direction: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> es(chi);
  const auto n = es.eigenvalues().size();
  LeadingDirection out;
  out.eigenvalue = es.eigenvalues()(n - 1);
  out.eigenvector = es.eigenvectors().col(n - 1);
  if (n >= 2) {
    double gap = out.eigenvalue - es.eigenvalues()(n - 2);
    out.degenerate = gap < tie_tol * std::max(std::abs(out.eigenvalue), 1e-300);
  }
  for (Eigen::Index i = 0; i < out.eigenvector.size(); ++i) {
    if (std::abs(out.eigenvector(i)) > 1e-12) {
      if (out.eigenvector(i) < 0) out.eigenvector = -out.eigenvector;
      break;
    }
  }
  return out;
}

CollapseFit collapse_fit(std::span<const SizedCurve> curves,
                         std::span<const double> hc_grid,
                         std::span<const double> nu_grid, double window) {
  check(curves.size() >= 2, "collapse_fit: need at least two system sizes");
  check(!hc_grid.empty() && !nu_grid.empty(), "collapse_fit: empty parameter grid");
  for (const auto& c : curves) {
    check(c.coupling.size() == c.chi.size() && c.coupling.size() >= 3,
          "collapse_fit: curves need at least three points");
    double lo = *std::min_element(c.chi.begin(), c.chi.end());
    double hi = *std::max_element(c.chi.begin(), c.chi.end());
    check(hi - lo > 1e-12 * std::max(std::abs(hi), 1.0),
          "collapse_fit: constant chi curve");
  }

  struct Scaled {
    std::vector<double> x, y;
  };

  CollapseFit best;
  double best_q = std::numeric_limits<double>::infinity();
  for (double hc : hc_grid) {
    for (double nu : nu_grid) {
      std::vector<Scaled> scaled;
      for (const auto& c : curves) {
        std::vector<std::size_t> order(c.coupling.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return c.coupling[a] < c.coupling[b];
        });
        Scaled s;
        for (std::size_t i : order) {
          if (std::abs(c.coupling[i] - hc) > window) continue;
          s.x.push_back((c.coupling[i] - hc) * std::pow(c.size, 1.0 / nu));
          s.y.push_back(c.chi[i] * std::pow(c.size, -2.0 / nu));
        }
        scaled.push_back(std::move(s));
      }
      // master-curve scatter: squared differences of linearly interpolated
      // curves over pairwise overlap regions, normalized by the y spread
      double num = 0.0, den = 0.0;
      int terms = 0;
      for (std::size_t a = 0; a < scaled.size(); ++a) {
        for (std::size_t b = 0; b < scaled.size(); ++b) {
          if (a == b || scaled[b].x.size() < 2) continue;
          double blo = scaled[b].x.front(), bhi = scaled[b].x.back();
          for (std::size_t i = 0; i < scaled[a].x.size(); ++i) {
            double x = scaled[a].x[i];
            if (x < blo || x > bhi) continue;
            auto it = std::upper_bound(scaled[b].x.begin(), scaled[b].x.end(), x);
            std::size_t j = static_cast<std::size_t>(it - scaled[b].x.begin());
            if (j == 0) j = 1;
            if (j >= scaled[b].x.size()) j = scaled[b].x.size() - 1;
            double x0 = scaled[b].x[j - 1], x1 = scaled[b].x[j];
            double t = (x1 > x0) ? (x - x0) / (x1 - x0) : 0.0;
            double yb = (1 - t) * scaled[b].y[j - 1] + t * scaled[b].y[j];
            double d = scaled[a].y[i] - yb;
            num += d * d;
            den += scaled[a].y[i] * scaled[a].y[i];
            ++terms;
          }
        }
      }
      if (terms < 4 || den <= 0) continue;
      double q = num / den;
      if (q < best_q) {
        best_q = q;
        best.critical = hc;
        best.exponent = nu;
        best.quality = q;
      }
    }
  }
  check(std::isfinite(best_q), "collapse_fit: no overlapping scaled curves in window");
  return best;
}

}  // namespace evmc::fidelity
