#include "evmc/couplings.hpp"

#include <random>

#include "evmc/rng.hpp"

namespace evmc {

int CouplingDistribution::size() const {
  switch (kind) {
    case DistributionKind::Grid:
      return counts.empty() ? 0 : counts[0];
    case DistributionKind::Grid2D:
      return counts.size() == 2 ? counts[0] * counts[1] : 0;
    case DistributionKind::UniformBox:
    case DistributionKind::PerSiteUniform:
    case DistributionKind::AxisUniform:
      return realizations;
    case DistributionKind::ExplicitList:
      return static_cast<int>(explicit_list.size());
  }
  return 0;
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  if (n == 1) {
    xs[0] = lo;
    return xs;
  }
  for (int i = 0; i < n; ++i)
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return xs;
}

}  // namespace

std::vector<CouplingVector> sample_couplings(const CouplingDistribution& dist,
                                             uint64_t seed) {
  check(dist.size() > 0, "couplings: realization count must be positive");
  std::vector<CouplingVector> out;
  out.reserve(static_cast<std::size_t>(dist.size()));
  auto rng = make_engine(seed, 0xC0, 0x91);

  switch (dist.kind) {
    case DistributionKind::Grid: {
      check(dist.lo.size() == 1 && dist.hi.size() == 1 && dist.counts.size() == 1,
            "couplings: grid needs scalar lo/hi/count");
      check(dist.labels.size() == 1, "couplings: grid needs one label");
      for (double x : linspace(dist.lo[0], dist.hi[0], dist.counts[0]))
        out.push_back({{x}, dist.labels});
      break;
    }
    case DistributionKind::Grid2D: {
      check(dist.lo.size() == 2 && dist.hi.size() == 2 && dist.counts.size() == 2,
            "couplings: grid2d needs two lo/hi/count entries");
      check(dist.labels.size() == 2, "couplings: grid2d needs two labels");
      auto xs = linspace(dist.lo[0], dist.hi[0], dist.counts[0]);
      auto ys = linspace(dist.lo[1], dist.hi[1], dist.counts[1]);
      for (double y : ys)
        for (double x : xs) out.push_back({{x, y}, dist.labels});
      break;
    }
    case DistributionKind::UniformBox: {
      check(!dist.lo.empty() && dist.lo.size() == dist.hi.size(),
            "couplings: uniform-box needs matching lo/hi");
      check(dist.labels.size() == dist.lo.size(),
            "couplings: uniform-box needs one label per component");
      for (int k = 0; k < dist.realizations; ++k) {
        CouplingVector g;
        g.labels = dist.labels;
        for (std::size_t c = 0; c < dist.lo.size(); ++c) {
          std::uniform_real_distribution<double> u(dist.lo[c], dist.hi[c]);
          g.values.push_back(u(rng));
        }
        out.push_back(std::move(g));
      }
      break;
    }
    case DistributionKind::PerSiteUniform: {
      check(dist.n_sites > 0, "couplings: per-site-uniform needs n_sites > 0");
      check(dist.h0 > 0, "couplings: per-site-uniform needs h0 > 0");
      for (int k = 0; k < dist.realizations; ++k) {
        CouplingVector g;
        std::uniform_real_distribution<double> u(0.0, dist.h0);
        for (int i = 0; i < dist.n_sites; ++i) {
          g.values.push_back(u(rng));
          g.labels.push_back("h" + std::to_string(i));
        }
        out.push_back(std::move(g));
      }
      break;
    }
    case DistributionKind::AxisUniform: {
      check(dist.lo.size() == 1 && dist.hi.size() == 1,
            "couplings: axis-uniform needs scalar lo/hi");
      check(dist.labels.size() == 2, "couplings: axis-uniform needs two labels");
      for (int k = 0; k < dist.realizations; ++k) {
        std::uniform_real_distribution<double> u(dist.lo[0], dist.hi[0]);
        double v = u(rng);
        bool first = (rng() & 1ULL) == 0;
        out.push_back({{first ? v : 0.0, first ? 0.0 : v}, dist.labels});
      }
      break;
    }
    case DistributionKind::ExplicitList: {
      out = dist.explicit_list;
      break;
    }
  }
  return out;
}

}  // namespace evmc
