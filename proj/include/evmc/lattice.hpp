#pragma once

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "evmc/common.hpp"

namespace evmc {

enum class LatticeKind { Chain, Square };

struct Bond {
  int i = 0;
  int j = 0;
};

/// Periodic chain or L x L square lattice. Sites are indexed 0..N-1; on the
/// square lattice site = x + L*y.
class Lattice {
 public:
  static Lattice chain(int n) {
    check(n >= 2, "lattice: chain length must be >= 2");
    return Lattice(LatticeKind::Chain, n, n);
  }
  static Lattice square(int l) {
    check(l >= 2, "lattice: square side must be >= 2");
    return Lattice(LatticeKind::Square, l, l * l);
  }

  LatticeKind kind() const { return kind_; }
  int extent() const { return extent_; }
  int size() const { return nsites_; }

  int x_of(int site) const { return kind_ == LatticeKind::Chain ? site : site % extent_; }
  int y_of(int site) const { return kind_ == LatticeKind::Chain ? 0 : site / extent_; }
  int site_at(int x, int y) const {
    int l = extent_;
    x = ((x % l) + l) % l;
    if (kind_ == LatticeKind::Chain) return x;
    y = ((y % l) + l) % l;
    return x + l * y;
  }
  int translate(int site, int dx, int dy) const {
    return site_at(x_of(site) + dx, y_of(site) + dy);
  }

  /// Nearest-neighbor bonds (distance 1). Chain: ring bonds; N=2 degenerates
  /// to a single bond.
  std::vector<Bond> bonds_nn() const {
    if (kind_ == LatticeKind::Chain) {
      std::vector<Bond> out;
      for (int i = 0; i + 1 < nsites_; ++i) out.push_back({i, i + 1});
      if (nsites_ > 2) out.push_back({nsites_ - 1, 0});
      return out;
    }
    return dedup({{1, 0}, {0, 1}});
  }

  /// Next-nearest (diagonal) bonds at distance sqrt(2), both orientations.
  std::vector<Bond> bonds_diagonal() const { return dedup({{1, 1}, {1, -1}}); }
  /// Diagonal bonds along +x+y only.
  std::vector<Bond> bonds_diagonal_right() const { return dedup({{1, 1}}); }
  /// Diagonal bonds along +x-y only.
  std::vector<Bond> bonds_diagonal_left() const { return dedup({{1, -1}}); }

  /// Third-neighbor bonds at distance 2 (2x and 2y displacements).
  std::vector<Bond> bonds_third() const { return dedup({{2, 0}, {0, 2}}); }

 private:
  Lattice(LatticeKind k, int extent, int nsites)
      : kind_(k), extent_(extent), nsites_(nsites) {}

  std::vector<Bond> dedup(std::vector<std::pair<int, int>> displacements) const {
    check(kind_ == LatticeKind::Square, "lattice: bond class needs a square lattice");
    std::set<std::pair<int, int>> seen;
    std::vector<Bond> out;
    for (int s = 0; s < nsites_; ++s) {
      for (auto [dx, dy] : displacements) {
        int t = translate(s, dx, dy);
        if (t == s) continue;
        auto key = std::minmax(s, t);
        if (seen.insert(key).second) out.push_back({key.first, key.second});
      }
    }
    return out;
  }

  LatticeKind kind_;
  int extent_;
  int nsites_;
};

}  // namespace evmc
