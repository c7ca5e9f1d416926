#include "pcvx/slicing.hpp"

#include <algorithm>
#include <cmath>

#include "pcvx/parallel.hpp"
#include "pcvx/random.hpp"

namespace pcvx {

bool hartogs_contains(const DomainSpec& spec, const Point& z, const Point& w, const RayConfig& ray, double tol) {
  if (z.size() != spec.dimension() || w.size() != spec.dimension()) {
    throw DimensionError("point and vector must match the domain dimension");
  }
  if (z.norm() >= spec.bounding_radius() || !spec.contains(z)) return false;
  if (w.norm() == 0.0) return true;
  return minkowski(spec, z, w, ray) < 1.0 - tol;
}

Verdict hartogs_psc_check(const DomainSpec& spec, const PshBudget& budget, std::uint64_t seed) {
  return psh_falsify(spec, PshTarget::hartogs_gauge(), budget, seed);
}

PlaneFrame PlaneFrame::orthonormalized(Point base, const Point& v1, const Point& v2) {
  if (v1.size() != base.size() || v2.size() != base.size()) throw DimensionError("frame vectors must match the base");
  if (base.size() < 2) throw PreconditionError("a complex plane needs dimension >= 2");
  const double n1 = v1.norm();
  if (!(n1 > 1e-12)) throw PreconditionError("frame vector is zero");
  const Point e1 = v1 / n1;
  Point e2 = v2 - e1 * e1.dot(v2);
  const double n2 = e2.norm();
  if (!(n2 > 1e-10 * std::max(1.0, v2.norm()))) throw PreconditionError("frame vectors are dependent");
  e2 /= n2;
  PlaneFrame f;
  f.base = std::move(base);
  f.vectors = ComplexMatrix(f.base.size(), 2);
  f.vectors.col(0) = e1;
  f.vectors.col(1) = e2;
  return f;
}

PlaneFrame PlaneFrame::random(Point base, Rng& rng) {
  const Eigen::Index n = base.size();
  const Point v1 = gaussian_point(rng, n);
  const Point v2 = gaussian_point(rng, n);
  return orthonormalized(std::move(base), v1, v2);
}

void PlaneFrame::validate() const {
  if (vectors.rows() != base.size() || vectors.cols() != 2) throw DimensionError("frame must be n x 2");
  const ComplexMatrix gram = vectors.adjoint() * vectors;
  if ((gram - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() > 1e-10) {
    throw PreconditionError("frame vectors are not orthonormal");
  }
}

SliceDomain slice_domain(const DomainSpec& spec, const PlaneFrame& frame) {
  if (frame.base.size() != spec.dimension()) throw DimensionError("frame does not match the domain dimension");
  frame.validate();
  return {frame, spec.restricted(frame.embedding())};
}

ComponentReport connected_components(const std::function<bool(double, double)>& member, const Window& window,
                                     double step, int min_cells) {
  if (!(step > 0.0)) throw PreconditionError("grid step must be positive");
  if (!(window.x1 > window.x0) || !(window.y1 > window.y0)) throw PreconditionError("window is empty");
  ComponentReport out;
  out.step = step;
  out.window = window;
  out.cols = static_cast<int>(std::floor((window.x1 - window.x0) / step + 1e-9));
  out.rows = static_cast<int>(std::floor((window.y1 - window.y0) / step + 1e-9));
  if (out.cols < 1 || out.rows < 1) throw PreconditionError("window is smaller than one cell");
  const auto cols = static_cast<std::size_t>(out.cols);
  const auto rows = static_cast<std::size_t>(out.rows);

  // Membership row by row in parallel; the fill itself is sequential.
  const std::vector<std::vector<char>> inside = parallel_map(rows, [&](std::size_t r) {
    std::vector<char> row(cols);
    const double y = window.y0 + (static_cast<double>(r) + 0.5) * step;
    for (std::size_t c = 0; c < cols; ++c) row[c] = member(window.x0 + (static_cast<double>(c) + 0.5) * step, y);
    return row;
  });

  out.labels.assign(rows * cols, 0);
  std::vector<int> raw(rows * cols, 0);
  std::vector<int> raw_sizes{0};
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < rows * cols; ++start) {
    if (!inside[start / cols][start % cols] || raw[start] != 0) continue;
    const int id = static_cast<int>(raw_sizes.size());
    raw_sizes.push_back(0);
    raw[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cell = stack.back();
      stack.pop_back();
      ++raw_sizes.back();
      const std::size_t r = cell / cols, c = cell % cols;
      auto visit = [&](std::size_t rr, std::size_t cc) {
        const std::size_t next = rr * cols + cc;
        if (inside[rr][cc] && raw[next] == 0) {
          raw[next] = id;
          stack.push_back(next);
        }
      };
      if (r > 0) visit(r - 1, c);
      if (r + 1 < rows) visit(r + 1, c);
      if (c > 0) visit(r, c - 1);
      if (c + 1 < cols) visit(r, c + 1);
    }
  }
  out.members = 0;
  for (int s : raw_sizes) out.members += s;
  if (out.members == 0) throw PreconditionError("no member cell in the window");

  std::vector<int> renumber(raw_sizes.size(), 0);
  for (std::size_t id = 1; id < raw_sizes.size(); ++id) {
    if (raw_sizes[id] >= min_cells) {
      out.sizes.push_back(raw_sizes[id]);
      renumber[id] = static_cast<int>(out.sizes.size());
    }
  }
  out.count = static_cast<int>(out.sizes.size());
  for (std::size_t k = 0; k < raw.size(); ++k) out.labels[k] = renumber[static_cast<std::size_t>(raw[k])];
  return out;
}

ExceptionalSweepReport exceptional_sweep(const DomainSpec& spec, const Point& a, int planes, const PshBudget& budget,
                                         std::uint64_t seed) {
  if (planes < 1) throw PreconditionError("plane count must be >= 1");
  if (a.size() != spec.dimension()) throw DimensionError("point dimension does not match the domain");
  ExceptionalSweepReport report;
  report.point = a;
  report.planes = planes;
  report.results = parallel_map(static_cast<std::size_t>(planes), [&](std::size_t k) {
    Rng rng = make_rng(seed, 0x500000 + k);
    PlaneVerdict pv;
    pv.frame = PlaneFrame::random(a, rng);
    const SliceDomain slice = slice_domain(spec, pv.frame);
    pv.verdict.budget.target = to_string(PshTarget::neglog_s());
    pv.verdict.budget.seed = mix_seed(seed, k);
    try {
      sample_interior(slice.domain, 1, pv.verdict.budget.seed);
    } catch (const PreconditionError&) {
      pv.empty = true;
      return pv;
    }
    PshBudget local = budget;
    if (budget.focus) local.focus = pv.frame.vectors.adjoint() * (*budget.focus - a);
    pv.verdict = psh_falsify(slice.domain, PshTarget::neglog_s(), local, mix_seed(seed, k));
    if (pv.verdict.falsified()) {
      const SignedDistance sd = signed_boundary_distance(slice.domain, pv.verdict.certificate->center);
      pv.puncture = sd.method == DistanceMethod::affine;
    }
    return pv;
  });
  for (int k = 0; k < planes; ++k) {
    if (report.results[static_cast<std::size_t>(k)].empty) ++report.empty;
    if (report.results[static_cast<std::size_t>(k)].verdict.falsified()) {
      ++report.falsified;
      report.falsifying.push_back(k);
    }
  }
  report.violation_fraction = static_cast<double>(report.falsified) / planes;
  return report;
}

std::optional<LiftedHyperplane> lifted_hyperplane_check(const DomainSpec& spec, const Point& a, const Point& b,
                                                        long probes, std::uint64_t seed,
                                                        const HyperplaneBudget& search) {
  const int n = spec.dimension();
  if (a.size() != n || b.size() != n) throw DimensionError("point and vector must match the domain dimension");
  if (hartogs_contains(spec, a, b)) return std::nullopt;
  LiftedHyperplane out;
  if (!spec.contains(a)) {
    out.lambda0 = 0.0;
  } else {
    const DirectionalDistance d = directional_distance(spec, a, b);
    out.lambda0 = std::polar(std::min(1.0, d.value), d.argmin_angle);
  }
  out.point = a + out.lambda0 * b;
  const HyperplaneResult h = hyperplane_search(spec, out.point, search, seed);
  if (!h.conormal) return std::nullopt;
  out.conormal = *h.conormal;

  // Normal of the lifted hyperplane in C^{2n}: <(z, w), (c, conj(lambda0) c)>.
  Point normal(2 * n);
  normal.head(n) = out.conormal;
  normal.tail(n) = std::conj(out.lambda0) * out.conormal;
  normal /= normal.norm();
  Point anchor(2 * n);
  anchor.head(n) = out.point;
  anchor.tail(n).setZero();
  out.probes = probes;
  const std::vector<char> hits = parallel_map(static_cast<std::size_t>(probes), [&](std::size_t k) {
    Rng rng = make_rng(seed, 0x600000 + k);
    Point q(2 * n);
    q.head(n) = a + 0.5 * gaussian_point(rng, n);
    q.tail(n) = b + 0.5 * gaussian_point(rng, n);
    q -= normal * normal.dot(q - anchor);
    const Point z = q.head(n), w = q.tail(n);
    return static_cast<char>(hartogs_contains(spec, z, w));
  });
  out.hits = std::count(hits.begin(), hits.end(), char{1});
  return out;
}

}  // namespace pcvx
