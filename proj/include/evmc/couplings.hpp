#pragma once

#include <string>
#include <vector>

#include "evmc/common.hpp"

namespace evmc {

/// Hamiltonian parameters gamma: a handful of dimensionless ratios for clean
/// systems, or one field per site for disordered ones. Labels carry the
/// semantics (e.g. "h/J", "J2/J1").
struct CouplingVector {
  std::vector<double> values;
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(values.size()); }
};

enum class DistributionKind {
  Grid,            // equispaced 1d grid, realizations = grid points
  Grid2D,          // cartesian product of two 1d grids
  UniformBox,      // i.i.d. uniform draws per component
  PerSiteUniform,  // one field per lattice site, each ~ U[0, h0]
  AxisUniform,     // two components, exactly one active per draw, ~ U[lo, hi]
  ExplicitList,    // realizations given verbatim
};

struct CouplingDistribution {
  DistributionKind kind = DistributionKind::Grid;
  std::vector<std::string> labels;

  // Grid / Grid2D / UniformBox / AxisUniform supports
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<int> counts;  // Grid: {R}; Grid2D: {n1, n2}

  // PerSiteUniform
  double h0 = 0.0;
  int n_sites = 0;

  int realizations = 0;  // R for the random kinds

  std::vector<CouplingVector> explicit_list;

  /// Number of realizations this distribution produces.
  int size() const;
};

/// Materialize the R coupling vectors. Grids are deterministic; random kinds
/// are reproducible under the seed.
std::vector<CouplingVector> sample_couplings(const CouplingDistribution& dist,
                                             uint64_t seed);

}  // namespace evmc
