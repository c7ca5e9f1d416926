#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcvx/convexity.hpp"
#include "pcvx/domain.hpp"
#include "pcvx/psh.hpp"
#include "pcvx/random.hpp"
#include "pcvx/ray.hpp"

namespace pcvx {

/// (z, w) is in the Hartogs-like domain iff z in D and the closed disk
/// z + lambda w, |lambda| <= 1, stays in D: minkowski(z, w) < 1 - tol.
bool hartogs_contains(const DomainSpec& spec, const Point& z, const Point& w, const RayConfig& ray = {},
                      double tol = 1e-7);

/// Circle-mean search on -log d_D(z, w) over complex lines of C^{2n}, i.e. a
/// pseudoconvexity test of the Hartogs-like domain.
Verdict hartogs_psc_check(const DomainSpec& spec, const PshBudget& budget, std::uint64_t seed);

/// Complex 2-plane a + zeta1 V1 + zeta2 V2 with Hermitian-orthonormal V1, V2.
struct PlaneFrame {
  Point base;
  ComplexMatrix vectors;  // n x 2

  /// Gram-Schmidt on (v1, v2); throws if they are dependent.
  static PlaneFrame orthonormalized(Point base, const Point& v1, const Point& v2);
  /// Unitary-invariant random frame through base.
  static PlaneFrame random(Point base, Rng& rng);

  /// Throws PreconditionError unless the vectors are orthonormal within 1e-10.
  void validate() const;
  Embedding embedding() const { return {base, vectors}; }
};

struct SliceDomain {
  PlaneFrame frame;
  DomainSpec domain;  // local coordinates (zeta1, zeta2)

  Point lift(const Point& zeta) const { return frame.base + frame.vectors * zeta; }
};

SliceDomain slice_domain(const DomainSpec& spec, const PlaneFrame& frame);

struct Window {
  double x0, x1, y0, y1;
};

struct ComponentReport {
  int count = 0;                 // components with >= min_cells cells
  int rows = 0, cols = 0;        // grid size (rows along y)
  double step = 0.0;
  Window window{};
  std::vector<int> labels;       // row-major; 0 = not a member, else component id
  std::vector<int> sizes;        // cells per reported component
  long members = 0;
};

/// Flood fill with 4-adjacency over grid cells (centers x0 + (i + 1/2) h)
/// where member(x, y) holds. Components below min_cells are dropped and
/// labelled 0. Throws if no cell is a member.
ComponentReport connected_components(const std::function<bool(double, double)>& member, const Window& window,
                                     double step, int min_cells = 4);

struct PlaneVerdict {
  PlaneFrame frame;
  Verdict verdict;
  bool puncture = false;  // witness center is nearest to a removed affine set
  bool empty = false;     // the plane misses D inside the window (nothing to test)
};

struct ExceptionalSweepReport {
  Point point;
  int planes = 0;
  std::vector<PlaneVerdict> results;
  int falsified = 0;
  int empty = 0;
  double violation_fraction = 0.0;  // falsified / planes
  std::vector<int> falsifying;  // plane indices

  bool exceptional_at_resolution() const { return falsified == 0; }
};

/// psh_falsify(neglog-s) on m seeded random planes through a. The budget's
/// focus, if any, is in ambient coordinates.
ExceptionalSweepReport exceptional_sweep(const DomainSpec& spec, const Point& a, int planes, const PshBudget& budget,
                                         std::uint64_t seed);

/// Hyperplane of C^{2n} lifted from a conormal: {(z, w) : <z + lambda0 w - p, c> = 0}.
struct LiftedHyperplane {
  Complex lambda0;
  Point point;     // p = a + lambda0 b, on or outside the boundary
  Point conormal;  // c, unit
  long probes = 0;
  long hits = 0;   // probes that fell in the Hartogs-like domain
};

/// For (a, b) outside the Hartogs-like domain, takes the exit lambda0 of the
/// disk a + lambda b (|lambda0| <= 1), a hyperplane through a + lambda0 b
/// missing D, and counts sampled points of its lift lying in the Hartogs-like
/// domain. Returns nothing when (a, b) is inside or no hyperplane is found.
std::optional<LiftedHyperplane> lifted_hyperplane_check(const DomainSpec& spec, const Point& a, const Point& b,
                                                        long probes, std::uint64_t seed,
                                                        const HyperplaneBudget& search = {});

}  // namespace pcvx
