#include "pcvx/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "pcvx/random.hpp"

namespace pcvx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ComplexMatrix orthonormal_columns(const ComplexMatrix& m) {
  if (m.cols() == 0) return ComplexMatrix(m.rows(), 0);
  Eigen::HouseholderQR<ComplexMatrix> qr(m);
  const ComplexMatrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if (std::abs(r(k, k)) < 1e-12) throw PreconditionError("spanning vectors are linearly dependent");
  }
  return qr.householderQ() * ComplexMatrix::Identity(m.rows(), m.cols());
}

/// Real matrix of zeta -> frame * zeta on interleaved coordinates.
RealFrame real_matrix(const ComplexMatrix& frame) {
  RealFrame out(2 * frame.rows(), 2 * frame.cols());
  for (Eigen::Index k = 0; k < frame.cols(); ++k) {
    for (Eigen::Index j = 0; j < frame.rows(); ++j) {
      const Complex v = frame(j, k);
      out(2 * j, 2 * k) = v.real();
      out(2 * j + 1, 2 * k) = v.imag();
      out(2 * j, 2 * k + 1) = -v.imag();
      out(2 * j + 1, 2 * k + 1) = v.real();
    }
  }
  return out;
}

}  // namespace

AffineSet::AffineSet(Point base_point, const ComplexMatrix& spanning) : base(std::move(base_point)) {
  if (spanning.rows() != base.size() && spanning.cols() > 0) {
    throw DimensionError("affine set spanning vectors do not match the base point dimension");
  }
  if (spanning.cols() >= base.size()) throw PreconditionError("removed affine set must have dimension < n");
  span = spanning.cols() == 0 ? ComplexMatrix(base.size(), 0) : orthonormal_columns(spanning);
}

Point AffineSet::project(const Point& z) const {
  if (span.cols() == 0) return base;
  return base + span * (span.adjoint() * (z - base));
}

double AffineSet::distance(const Point& z) const {
  Point offset = z - base;
  if (span.cols() > 0) offset -= span * (span.adjoint() * offset);
  return offset.norm();
}

RegionNode primitive(ScalarField field) {
  RegionNode node;
  node.kind = RegionNode::Kind::primitive;
  node.field = std::make_shared<const ScalarField>(std::move(field));
  return node;
}

RegionNode primitive(std::string_view formula, int dimension) { return primitive(parse_field(formula, dimension)); }

RegionNode union_of(std::vector<RegionNode> children) {
  if (children.empty()) throw PreconditionError("union needs at least one child");
  RegionNode node;
  node.kind = RegionNode::Kind::union_of;
  node.children = std::move(children);
  return node;
}

RegionNode intersection_of(std::vector<RegionNode> children) {
  if (children.empty()) throw PreconditionError("intersection needs at least one child");
  RegionNode node;
  node.kind = RegionNode::Kind::intersection_of;
  node.children = std::move(children);
  return node;
}

RegionNode complement_of(RegionNode child) {
  RegionNode node;
  node.kind = RegionNode::Kind::complement_of;
  node.children.push_back(std::move(child));
  return node;
}

RegionNode minus_affine(RegionNode child, AffineSet removed) {
  RegionNode node;
  node.kind = RegionNode::Kind::minus_affine;
  node.children.push_back(std::move(child));
  node.removed = std::make_shared<const AffineSet>(std::move(removed));
  return node;
}

// ---------------------------------------------------------------------------

DomainSpec::DomainSpec(int dimension, RegionNode root, double bounding_radius)
    : local_dimension_(dimension), ambient_dimension_(dimension), bounding_radius_(bounding_radius),
      root_(std::move(root)) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw DimensionError("dimension must be between 1 and " + std::to_string(kMaxDimension));
  }
  if (!(bounding_radius > 0.0) || !std::isfinite(bounding_radius)) {
    throw PreconditionError("bounding radius must be positive and finite");
  }
  compile(root_);
  for (const AffineSet* a : affine_) {
    local_affine_.push_back(*a);
    real_affine_.push_back({to_real_point(a->base), real_matrix(a->span)});
  }
}

void DomainSpec::compile(const RegionNode& node) {
  using Kind = RegionNode::Kind;
  switch (node.kind) {
    case Kind::primitive:
      if (!node.field) throw PreconditionError("primitive node without a field");
      if (node.field->dimension() != ambient_dimension_) {
        throw DimensionError("primitive of dimension " + std::to_string(node.field->dimension()) +
                             " in a domain of dimension " + std::to_string(ambient_dimension_));
      }
      program_.push_back({Step::Op::primitive, static_cast<int>(primitives_.size())});
      primitives_.push_back(node.field.get());
      return;
    case Kind::union_of:
    case Kind::intersection_of:
      if (node.children.empty()) throw PreconditionError("union/intersection node without children");
      for (const RegionNode& child : node.children) compile(child);
      program_.push_back(
          {node.kind == Kind::union_of ? Step::Op::any : Step::Op::all, static_cast<int>(node.children.size())});
      return;
    case Kind::complement_of:
      if (node.children.size() != 1) throw PreconditionError("complement node needs exactly one child");
      compile(node.children.front());
      program_.push_back({Step::Op::negate, 0});
      return;
    case Kind::minus_affine:
      if (node.children.size() != 1 || !node.removed) {
        throw PreconditionError("minus-affine node needs one child and an affine set");
      }
      if (node.removed->base.size() != ambient_dimension_) throw DimensionError("affine set dimension mismatch");
      compile(node.children.front());
      program_.push_back({Step::Op::remove, static_cast<int>(affine_.size())});
      affine_.push_back(node.removed.get());
      return;
  }
}

void DomainSpec::set_embedding(const Embedding& e) {
  embedding_ = e;
  real_base_ = to_real_point(e.base);
  real_frame_ = real_matrix(e.frame);
  local_dimension_ = static_cast<int>(e.frame.cols());
}

Point DomainSpec::lift(const Point& zeta) const {
  if (!embedding_) return zeta;
  return embedding_->base + embedding_->frame * zeta;
}

RealPoint DomainSpec::lift_real(const RealPoint& x) const {
  if (!embedding_) return x;
  return real_base_ + real_frame_ * x;
}

bool DomainSpec::evaluate_ambient(const RealPoint& x) const {
  std::array<bool, 64> stack;
  std::size_t top = 0;
  const std::span<const double> real(x.data(), static_cast<std::size_t>(x.size()));
  for (const Step& step : program_) {
    switch (step.op) {
      case Step::Op::primitive:
        if (top == stack.size()) throw Error("region tree too deep");
        stack[top++] = primitives_[static_cast<std::size_t>(step.arg)]->evaluate(real) < 0.0;
        break;
      case Step::Op::any:
      case Step::Op::all: {
        const std::size_t first = top - static_cast<std::size_t>(step.arg);
        bool value = step.op == Step::Op::all;
        for (std::size_t k = first; k < top; ++k) {
          value = step.op == Step::Op::all ? value && stack[k] : value || stack[k];
        }
        top = first;
        stack[top++] = value;
        break;
      }
      case Step::Op::negate:
        stack[top - 1] = !stack[top - 1];
        break;
      case Step::Op::remove:
        if (stack[top - 1]) {
          const RealAffine& a = real_affine_[static_cast<std::size_t>(step.arg)];
          RealPoint offset = x - a.base;
          if (a.basis.cols() > 0) offset -= a.basis * (a.basis.transpose() * offset);
          stack[top - 1] = offset.norm() > kAffineTolerance;
        }
        break;
    }
  }
  return stack[0];
}

bool DomainSpec::contains_real(const RealPoint& x) const {
  if (x.size() != 2 * local_dimension_) throw DimensionError("point dimension does not match the domain");
  if (!embedding_) return evaluate_ambient(x);
  return evaluate_ambient(real_base_ + real_frame_ * x);
}

bool DomainSpec::contains(const Point& z) const {
  if (z.size() != local_dimension_) {
    throw DimensionError("point has " + std::to_string(z.size()) + " coordinates, domain has dimension " +
                         std::to_string(local_dimension_));
  }
  return contains_real(to_real_point(z));
}

double DomainSpec::primitive_value_real(int i, const RealPoint& x) const {
  const ScalarField& f = *primitives_[static_cast<std::size_t>(i)];
  if (!embedding_) return f.evaluate<double>({x.data(), static_cast<std::size_t>(x.size())});
  const RealPoint y = real_base_ + real_frame_ * x;
  return f.evaluate<double>({y.data(), static_cast<std::size_t>(y.size())});
}

double DomainSpec::primitive_value(int i, const Point& zeta) const {
  return primitive_value_real(i, to_real_point(zeta));
}

DomainSpec DomainSpec::restricted(const Embedding& local) const {
  if (local.base.size() != local_dimension_ || local.frame.rows() != local_dimension_) {
    throw DimensionError("embedding does not match the domain dimension");
  }
  if (local.frame.cols() < 1 || local.frame.cols() > local_dimension_) {
    throw PreconditionError("embedding frame must have between 1 and m columns");
  }
  DomainSpec out = *this;
  Embedding composed;
  if (embedding_) {
    composed.base = embedding_->base + embedding_->frame * local.base;
    composed.frame = embedding_->frame * local.frame;
  } else {
    composed = local;
  }
  out.set_embedding(composed);
  out.local_affine_.clear();
  out.removes_everything_ = false;

  const Eigen::Index n = ambient_dimension_;
  const Eigen::Index m = out.local_dimension_;
  for (const AffineSet* a : out.affine_) {
    ComplexMatrix projector = ComplexMatrix::Identity(n, n);
    if (a->span.cols() > 0) projector -= a->span * a->span.adjoint();
    const ComplexMatrix mat = projector * composed.frame;
    const Point rhs = projector * (a->base - composed.base);
    Eigen::JacobiSVD<ComplexMatrix> svd(mat, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Point zeta0 = svd.solve(rhs);
    if ((mat * zeta0 - rhs).norm() > 1e-10 * (1.0 + rhs.norm())) continue;  // plane misses the set
    const Eigen::VectorXd sigma = svd.singularValues();
    std::vector<Eigen::Index> null_columns;
    for (Eigen::Index k = 0; k < m; ++k) {
      const double s = k < sigma.size() ? sigma(k) : 0.0;
      if (s < 1e-10) null_columns.push_back(k);
    }
    if (static_cast<Eigen::Index>(null_columns.size()) == m) {
      out.removes_everything_ = true;
      continue;
    }
    ComplexMatrix null_space(m, static_cast<Eigen::Index>(null_columns.size()));
    for (std::size_t k = 0; k < null_columns.size(); ++k) {
      null_space.col(static_cast<Eigen::Index>(k)) = svd.matrixV().col(null_columns[k]);
    }
    out.local_affine_.emplace_back(zeta0, null_space);
  }
  return out;
}

namespace {

std::string format_point(const Point& z) {
  std::ostringstream out;
  out.precision(17);
  out << "(";
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (j > 0) out << ", ";
    out << z(j).real() << (std::signbit(z(j).imag()) ? "-" : "+") << std::abs(z(j).imag()) << "i";
  }
  out << ")";
  return out.str();
}

std::string describe_node(const RegionNode& node) {
  using Kind = RegionNode::Kind;
  switch (node.kind) {
    case Kind::primitive:
      return "{" + node.field->to_string() + " < 0}";
    case Kind::union_of:
    case Kind::intersection_of: {
      std::string text = node.kind == Kind::union_of ? "union(" : "intersection(";
      for (std::size_t k = 0; k < node.children.size(); ++k) {
        text += (k > 0 ? ", " : "") + describe_node(node.children[k]);
      }
      return text + ")";
    }
    case Kind::complement_of:
      return "complement(" + describe_node(node.children.front()) + ")";
    case Kind::minus_affine: {
      std::string text =
          "minus(" + describe_node(node.children.front()) + ", affine " + format_point(node.removed->base);
      for (Eigen::Index k = 0; k < node.removed->span.cols(); ++k) {
        text += " + C*" + format_point(node.removed->span.col(k));
      }
      return text + ")";
    }
  }
  return {};
}

}  // namespace

std::string DomainSpec::describe() const {
  std::string text = describe_node(root_);
  if (embedding_) {
    text += " restricted to " + format_point(embedding_->base);
    for (Eigen::Index k = 0; k < embedding_->frame.cols(); ++k) {
      text += " + z" + std::to_string(k + 1) + "*" + format_point(embedding_->frame.col(k));
    }
  }
  return text;
}

bool contains(const DomainSpec& spec, const Point& z) { return spec.contains(z); }

// ---------------------------------------------------------------------------

std::optional<double> first_change(const DomainSpec& spec, const RealPoint& z, const RealPoint& direction,
                                   double t_max, double first_step, double max_step, double tolerance) {
  const bool start_state = spec.contains_real(z);
  double previous = 0.0;
  double t = std::min(first_step, t_max);
  for (;;) {
    if (spec.contains_real(z + t * direction) != start_state) {
      double lo = previous;
      double hi = t;
      for (int it = 0; it < 200 && hi - lo > tolerance * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (spec.contains_real(z + mid * direction) == start_state) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return hi;
    }
    if (t >= t_max) return std::nullopt;
    previous = t;
    t = std::min(t + std::min(t, max_step), t_max);
  }
}

std::optional<double> first_change(const DomainSpec& spec, const Point& z, const Point& direction, double t_max,
                                   double first_step, double max_step, double tolerance) {
  return first_change(spec, to_real_point(z), to_real_point(direction), t_max, first_step, max_step, tolerance);
}

std::string to_string(DistanceMethod method) {
  switch (method) {
    case DistanceMethod::projection:
      return "projection";
    case DistanceMethod::edge:
      return "edge";
    case DistanceMethod::affine:
      return "affine";
    case DistanceMethod::ray:
      return "ray";
    case DistanceMethod::none:
      return "none";
  }
  return "none";
}

namespace {

using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 16>;
using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using Kkt = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 18, 18>;
using KktVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 18, 1>;

RealPoint primitive_gradient(const DomainSpec& spec, int i, const RealPoint& x) {
  RealPoint g(x.size());
  RealPoint y = x;
  for (Eigen::Index a = 0; a < x.size(); ++a) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(a)));
    y(a) = x(a) + h;
    const double fp = spec.primitive_value_real(i, y);
    y(a) = x(a) - h;
    const double fm = spec.primitive_value_real(i, y);
    y(a) = x(a);
    g(a) = (fp - fm) / (2.0 * h);
  }
  return g;
}

RealFrame primitive_hessian(const DomainSpec& spec, int i, const RealPoint& x) {
  const Eigen::Index m2 = x.size();
  const double h = 1e-4 * std::max(1.0, x.norm());
  const double f0 = spec.primitive_value_real(i, x);
  RealFrame hess(m2, m2);
  RealPoint y = x;
  for (Eigen::Index a = 0; a < m2; ++a) {
    y(a) = x(a) + h;
    const double fp = spec.primitive_value_real(i, y);
    y(a) = x(a) - h;
    const double fm = spec.primitive_value_real(i, y);
    y(a) = x(a);
    hess(a, a) = (fp - 2.0 * f0 + fm) / (h * h);
    for (Eigen::Index b = a + 1; b < m2; ++b) {
      y(a) = x(a) + h;
      y(b) = x(b) + h;
      const double fpp = spec.primitive_value_real(i, y);
      y(b) = x(b) - h;
      const double fpm = spec.primitive_value_real(i, y);
      y(a) = x(a) - h;
      const double fmm = spec.primitive_value_real(i, y);
      y(b) = x(b) + h;
      const double fmp = spec.primitive_value_real(i, y);
      y(a) = x(a);
      y(b) = x(b);
      hess(a, b) = hess(b, a) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return hess;
}

using Constraint = std::vector<int>;

/// Newton iteration onto {F_i = 0 for i in c} with minimal-norm steps.
std::optional<RealPoint> newton_onto(const DomainSpec& spec, const Constraint& c, RealPoint p) {
  const double radius = spec.bounding_radius();
  const Eigen::Index k = static_cast<Eigen::Index>(c.size());
  for (int it = 0; it < 60; ++it) {
    Jacobian jac(k, p.size());
    SmallVec residual(k);
    double worst = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
      const int i = c[static_cast<std::size_t>(r)];
      const RealPoint g = primitive_gradient(spec, i, p);
      const double gn = g.norm();
      if (!(gn > 1e-12)) return std::nullopt;
      residual(r) = spec.primitive_value_real(i, p);
      jac.row(r) = g.transpose();
      worst = std::max(worst, std::abs(residual(r)) / gn);
    }
    if (worst <= 1e-15 * (1.0 + p.norm())) return p;
    const Small gram = jac * jac.transpose();
    const double det = gram.determinant();
    if (!(std::abs(det) > 1e-20 * std::pow(gram.norm(), static_cast<double>(k)))) return std::nullopt;
    const SmallVec lambda = gram.inverse() * residual;
    const RealPoint step = jac.transpose() * lambda;
    if (!(step.norm() < 4.0 * radius)) return std::nullopt;
    p -= step;
    if (it > 8 && step.norm() <= 1e-15 * (1.0 + p.norm())) return p;
  }
  double worst = 0.0;
  for (int i : c) worst = std::max(worst, std::abs(spec.primitive_value_real(i, p)));
  if (worst < 1e-9 * (1.0 + p.norm())) return p;
  return std::nullopt;
}

/// Foot point of z on {F_i = 0, i in c}: Newton on the Lagrange conditions
/// p - z + J^T lambda = 0, F(p) = 0, re-projected onto the zero set each step.
std::optional<RealPoint> foot_point(const DomainSpec& spec, const Constraint& c, const RealPoint& z,
                                    const RealPoint& start) {
  std::optional<RealPoint> p = newton_onto(spec, c, start);
  if (!p) {
    // Gradient may vanish at the start (e.g. the center of a sphere).
    RealPoint shifted = start;
    const double s = std::max(1.0, start.norm());
    shifted(0) += 1e-3 * s;
    shifted(1) += 0.7e-3 * s;
    p = newton_onto(spec, c, shifted);
    if (!p) return std::nullopt;
  }
  const Eigen::Index m2 = z.size();
  const Eigen::Index k = static_cast<Eigen::Index>(c.size());
  const double scale = 1.0 + z.norm();
  for (int it = 0; it < 40; ++it) {
    Jacobian jac(k, m2);
    for (Eigen::Index r = 0; r < k; ++r) {
      jac.row(r) = primitive_gradient(spec, c[static_cast<std::size_t>(r)], *p).transpose();
    }
    const RealPoint offset = *p - z;
    const Small gram = jac * jac.transpose();
    const SmallVec lambda = gram.inverse() * (-jac * offset);
    const RealPoint stationarity = offset + jac.transpose() * lambda;
    // Finite-difference gradients carry ~1e-10 relative noise.
    if (stationarity.norm() <= 1e-9 * offset.norm() + 1e-13 * scale) break;

    Kkt kkt = Kkt::Zero(m2 + k, m2 + k);
    kkt.topLeftCorner(m2, m2).setIdentity();
    for (Eigen::Index r = 0; r < k; ++r) {
      kkt.topLeftCorner(m2, m2) += lambda(r) * primitive_hessian(spec, c[static_cast<std::size_t>(r)], *p);
    }
    kkt.topRightCorner(m2, k) = jac.transpose();
    kkt.bottomLeftCorner(k, m2) = jac;
    KktVec rhs = KktVec::Zero(m2 + k);
    rhs.head(m2) = -stationarity;
    Eigen::FullPivLU<Kkt> lu(kkt);
    if (!lu.isInvertible()) break;
    RealPoint step = lu.solve(rhs).head(m2);
    const double limit = 0.5 * std::max(offset.norm(), 1e-12);
    if (step.norm() > limit) step *= limit / step.norm();
    std::optional<RealPoint> next = newton_onto(spec, c, *p + step);
    if (!next) break;
    const double move = (*next - *p).norm();
    p = next;
    if (move <= 1e-13 * scale) break;
  }
  return p;
}

const std::vector<RealPoint>& ray_directions(int dimension, const DistanceConfig& cfg) {
  using Key = std::tuple<int, int, std::uint64_t>;
  static std::mutex mutex;
  static std::map<Key, std::vector<RealPoint>> cache;
  const Key key{dimension, cfg.rays, cfg.ray_seed};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<RealPoint> dirs;
  for (int a = 0; a < 2 * dimension; ++a) {
    for (double sign : {1.0, -1.0}) {
      RealPoint u = RealPoint::Zero(2 * dimension);
      u(a) = sign;
      dirs.push_back(u);
    }
  }
  Rng rng = make_rng(cfg.ray_seed, static_cast<std::uint64_t>(dimension));
  for (int k = 0; k < cfg.rays; ++k) dirs.push_back(to_real_point(random_unit(rng, dimension)));
  return cache.emplace(key, std::move(dirs)).first->second;
}

/// Largest t with |z + t u| <= R for unit u.
double window_exit(const RealPoint& z, const RealPoint& u, double radius) {
  const double b = z.dot(u);
  const double c = z.squaredNorm() - radius * radius;
  const double disc = b * b - c;
  if (disc <= 0.0) return 0.0;
  return std::max(0.0, -b + std::sqrt(disc));
}

struct Candidate {
  double distance;
  RealPoint target;
  DistanceMethod method;
  Constraint constraint;  // zero sets through the target (empty for affine sets)
};

class DistanceSearch {
 public:
  DistanceSearch(const DomainSpec& spec, const RealPoint& z, const DistanceConfig& cfg)
      : spec_(spec), z_(z), cfg_(cfg), inside_(spec.contains_real(z)), scale_(std::max(1.0, z.norm())) {}

  SignedDistance run() {
    std::vector<Candidate> candidates;
    for (const AffineSet& a : spec_.local_affine_sets()) {
      const RealPoint q = to_real_point(a.project(to_point(z_)));
      candidates.push_back({(q - z_).norm(), q, DistanceMethod::affine, {}});
    }
    const int count = spec_.primitive_count();
    // Distance to each zero set; an edge point is at least as far as both.
    std::vector<double> single(static_cast<std::size_t>(count), 0.0);
    std::vector<std::optional<RealPoint>> feet(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const std::size_t before = candidates.size();
      add_projection({i}, z_, candidates);
      if (candidates.size() > before) {
        single[static_cast<std::size_t>(i)] = candidates.back().distance;
        feet[static_cast<std::size_t>(i)] = candidates.back().target;
      }
    }
    validate_all(candidates);
    if (count >= 2 && count <= 6) {
      for (int i = 0; i < count; ++i) {
        for (int j = i + 1; j < count; ++j) {
          if (std::max(single[static_cast<std::size_t>(i)], single[static_cast<std::size_t>(j)]) >= best_) continue;
          // Zero sets may meet in several places; start from z and from
          // both single feet.
          add_projection({i, j}, z_, candidates);
          for (int k : {i, j}) {
            if (feet[static_cast<std::size_t>(k)]) add_projection({i, j}, *feet[static_cast<std::size_t>(k)], candidates);
          }
        }
      }
      validate_all(candidates);
    }

    march_rays();
    if (method_ == DistanceMethod::ray) refine_from_hit();

    SignedDistance out;
    out.finite = std::isfinite(best_);
    out.method = method_;
    out.value = inside_ ? best_ : -best_;
    out.nearest = to_point(out.finite ? nearest_ : z_);
    if (!out.finite) {
      out.accuracy = 0.0;
    } else if (method_ == DistanceMethod::ray) {
      out.accuracy = best_;
    } else {
      out.accuracy = 1e-10 * scale_;
    }
    return out;
  }

 private:
  void add_projection(const Constraint& c, const RealPoint& start, std::vector<Candidate>& out) const {
    std::optional<RealPoint> p = foot_point(spec_, c, z_, start);
    if (!p) return;
    out.push_back({(*p - z_).norm(), *p, c.size() == 1 ? DistanceMethod::projection : DistanceMethod::edge, c});
  }

  bool changed(const RealPoint& x) const { return spec_.contains_real(x) != inside_; }

  bool on_boundary_here() const {
    // z is numerically on a zero set or removed set: confirm a membership
    // change within a tiny neighborhood.
    const double eps = 1e-9 * scale_;
    for (const RealPoint& u : ray_directions(spec_.dimension(), cfg_)) {
      if (changed(z_ + eps * u)) return true;
    }
    return false;
  }

  void validate(const Candidate& c) {
    if (!(c.distance < best_)) return;
    if (c.distance <= 1e-13 * scale_) {
      if (on_boundary_here()) accept(c.distance, c.target, c.method);
      return;
    }
    const RealPoint u = (c.target - z_) / c.distance;
    // Coarse check that nothing changes before the target, then confirm the
    // change happens at the target itself.
    constexpr int kSamples = 8;
    double previous = 0.0;
    for (int s = 1; s < kSamples; ++s) {
      const double t = c.distance * s / kSamples;
      if (changed(z_ + t * u)) {
        accept(bisect(u, previous, t), DistanceMethod::ray, u);
        return;
      }
      previous = t;
    }
    const double before = c.distance * (1.0 - 1e-9);
    const double after = c.distance * (1.0 + 1e-9) + 1e-15 * scale_;
    if (c.method == DistanceMethod::affine) {
      // Removed sets are thin: membership changes only at the target itself
      // (inside) or on the approach to it (outside).
      if (inside_ ? changed(c.target) : changed(z_ + before * u)) accept(c.distance, c.target, c.method);
      return;
    }
    if (changed(z_ + before * u)) {
      accept(bisect(u, previous, before), DistanceMethod::ray, u);
      return;
    }
    if (changed(z_ + after * u) || changed_near(c)) accept(c.distance, c.target, c.method);
  }

  /// Membership change just off the target along signed sums of the unit
  /// normals of its zero sets. Needed at corners, where continuing along the
  /// approach direction can pass beside the complement.
  bool changed_near(const Candidate& c) const {
    const double eps = 1e-9 * scale_;
    std::vector<RealPoint> normals;
    for (int i : c.constraint) {
      const RealPoint g = primitive_gradient(spec_, i, c.target);
      if (!(g.norm() > 0.0)) return false;
      normals.push_back(g / g.norm());
    }
    const int combos = 1 << normals.size();
    for (int mask = 0; mask < combos; ++mask) {
      RealPoint w = RealPoint::Zero(z_.size());
      for (std::size_t k = 0; k < normals.size(); ++k) w += (mask >> k & 1 ? -1.0 : 1.0) * normals[k];
      const double wn = w.norm();
      if (wn > 1e-6 && changed(c.target + (eps / wn) * w)) return true;
    }
    return false;
  }

  double bisect(const RealPoint& u, double lo, double hi) const {
    for (int it = 0; it < 200 && hi - lo > cfg_.tolerance * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (changed(z_ + mid * u)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }

  void accept(double t, DistanceMethod method, const RealPoint& u) { accept(t, z_ + t * u, method); }

  void accept(double t, const RealPoint& point, DistanceMethod method) {
    if (t < best_) {
      best_ = t;
      nearest_ = point;
      method_ = method;
    }
  }

  void march_rays() {
    const double radius = spec_.bounding_radius();
    for (const RealPoint& u : ray_directions(spec_.dimension(), cfg_)) {
      const double limit = window_exit(z_, u, radius);
      if (std::isfinite(best_)) {
        const double reach = std::min(best_, limit);
        if (reach <= 0.0) continue;
        constexpr int kSamples = 6;
        double previous = 0.0;
        for (int s = 1; s <= kSamples; ++s) {
          const double t = reach * s / kSamples;
          if (changed(z_ + t * u)) {
            const double hit = bisect(u, previous, t);
            if (hit < best_ - 1e-10 * scale_) accept(hit, DistanceMethod::ray, u);
            break;
          }
          previous = t;
        }
      } else {
        if (limit <= 0.0) continue;
        const std::optional<double> t =
            first_change(spec_, z_, u, limit, std::min(limit, 1e-6 * radius), radius / 256.0, cfg_.tolerance);
        if (t) accept(*t, DistanceMethod::ray, u);
      }
    }
  }

  void refine_from_hit() {
    const RealPoint hit = nearest_;
    std::vector<std::pair<double, int>> active;
    for (int i = 0; i < spec_.primitive_count(); ++i) {
      const double gn = primitive_gradient(spec_, i, hit).norm();
      if (!(gn > 0.0)) continue;
      const double residual = std::abs(spec_.primitive_value_real(i, hit)) / gn;
      if (residual < 1e-6 * scale_) active.emplace_back(residual, i);
    }
    std::sort(active.begin(), active.end());
    std::vector<Candidate> candidates;
    for (const auto& entry : active) add_projection({entry.second}, hit, candidates);
    if (!active.empty()) {
      for (int j = 0; j < spec_.primitive_count() && j < 8; ++j) {
        if (j != active[0].second) add_projection({active[0].second, j}, hit, candidates);
      }
    }
    validate_all(candidates);
  }

  void validate_all(std::vector<Candidate>& candidates) {
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });
    for (const Candidate& c : candidates) validate(c);
    candidates.clear();
  }

  const DomainSpec& spec_;
  const RealPoint z_;
  const DistanceConfig& cfg_;
  bool inside_;
  double scale_;
  double best_ = kInf;
  RealPoint nearest_;
  DistanceMethod method_ = DistanceMethod::none;
};

}  // namespace

SignedDistance signed_boundary_distance(const DomainSpec& spec, const Point& z, const DistanceConfig& cfg) {
  if (z.size() != spec.dimension()) throw DimensionError("point dimension does not match the domain");
  if (!(z.norm() <= spec.bounding_radius() * (1.0 + 1e-12))) {
    throw PreconditionError("point lies outside the bounding radius " + std::to_string(spec.bounding_radius()));
  }
  if (spec.removes_everything()) {
    SignedDistance out;
    out.value = 0.0;
    out.method = DistanceMethod::affine;
    out.nearest = z;
    return out;
  }
  return DistanceSearch(spec, to_real_point(z), cfg).run();
}

double signed_distance_value(const DomainSpec& spec, const Point& z, const DistanceConfig& cfg) {
  const SignedDistance d = signed_boundary_distance(spec, z, cfg);
  if (d.finite) return d.value;
  return d.value > 0 ? spec.bounding_radius() : -spec.bounding_radius();
}

// ---------------------------------------------------------------------------

namespace {

void fill_tangents(BoundaryPointData& data) {
  const Eigen::Index m = data.point.size();
  const Complex i_unit(0.0, 1.0);
  data.complex_tangent = m > 1 ? hermitian_complement(data.normal) : ComplexMatrix(m, 0);
  data.real_tangent = ComplexMatrix(m, 2 * m - 1);
  for (Eigen::Index k = 0; k < m - 1; ++k) {
    data.real_tangent.col(2 * k) = data.complex_tangent.col(k);
    data.real_tangent.col(2 * k + 1) = i_unit * data.complex_tangent.col(k);
  }
  data.real_tangent.col(2 * m - 2) = i_unit * data.normal;
}

/// Points of removed affine sets with a normal pointing into D. With a focus,
/// points are drawn around the projection of the focus and kept within
/// `spread` of it; otherwise around the set base with scale `spread`.
void append_punctures(const DomainSpec& spec, int count, std::uint64_t seed, const Point* focus, double spread,
                      std::vector<BoundaryPointData>& out) {
  const auto& sets = spec.local_affine_sets();
  if (sets.empty()) return;
  const int m = spec.dimension();
  const double radius = spec.bounding_radius();
  for (int k = 0; k < count; ++k) {
    Rng rng = make_rng(seed, 0x9000 + static_cast<std::uint64_t>(k));
    const AffineSet& s = sets[static_cast<std::size_t>(k) % sets.size()];
    const Point origin = focus != nullptr ? s.project(*focus) : s.base;
    if (focus != nullptr && (origin - *focus).norm() > spread) continue;
    const double scale = focus != nullptr ? 0.5 * spread : spread;
    for (int attempt = 0; attempt < 32; ++attempt) {
      Point q = origin;
      if (s.span.cols() > 0) q += s.span * (gaussian_point(rng, s.span.cols()) * scale);
      if (q.norm() > radius) continue;
      if (focus != nullptr && (q - *focus).norm() > spread) continue;
      Point nu = random_unit(rng, m);
      if (s.span.cols() > 0) nu -= s.span * (s.span.adjoint() * nu);
      if (!(nu.norm() > 1e-6)) continue;
      nu /= nu.norm();
      if (spec.contains(q) || !spec.contains(q + 1e-9 * std::max(1.0, q.norm()) * nu)) continue;
      BoundaryPointData data;
      data.point = q;
      data.normal = nu;
      data.kind = BoundaryPointData::Kind::puncture;
      fill_tangents(data);
      out.push_back(std::move(data));
      break;
    }
  }
}

}  // namespace

BoundaryPointData boundary_point_data(const DomainSpec& spec, const Point& a) {
  if (a.size() != spec.dimension()) throw DimensionError("point dimension does not match the domain");
  const int m = spec.dimension();
  const double scale = std::max(1.0, a.norm());
  const RealPoint x = to_real_point(a);
  BoundaryPointData data;
  data.point = a;

  double affine_distance = kInf;
  const AffineSet* nearest_set = nullptr;
  for (const AffineSet& s : spec.local_affine_sets()) {
    const double d = s.distance(a);
    if (d < affine_distance) {
      affine_distance = d;
      nearest_set = &s;
    }
  }

  double best = kInf;
  double second = kInf;
  RealPoint best_gradient;
  for (int i = 0; i < spec.primitive_count(); ++i) {
    const RealPoint g = primitive_gradient(spec, i, x);
    const double gn = g.norm();
    const double r = gn > 0.0 ? std::abs(spec.primitive_value_real(i, x)) / gn : kInf;
    if (r < best) {
      second = best;
      best = r;
      data.active_primitive = i;
      best_gradient = g;
    } else if (r < second) {
      second = r;
    }
  }

  if (nearest_set != nullptr && affine_distance <= 1e-9 * scale && affine_distance < best) {
    data.kind = BoundaryPointData::Kind::puncture;
    // Unit vector orthogonal to the removed set, closest to a coordinate axis.
    double best_norm = -1.0;
    for (int j = 0; j < 2 * m; ++j) {
      Point e = Point::Zero(m);
      e(j / 2) = j % 2 == 0 ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
      if (nearest_set->span.cols() > 0) e -= nearest_set->span * (nearest_set->span.adjoint() * e);
      if (e.norm() > best_norm + 1e-12) {
        best_norm = e.norm();
        data.normal = e / e.norm();
      }
    }
  } else {
    if (data.active_primitive < 0 || !(best_gradient.norm() > 0.0)) {
      throw PreconditionError("no active smooth primitive at the boundary point");
    }
    Point normal = to_point(best_gradient);
    normal /= normal.norm();
    const double eps = 1e-6 * scale;
    const bool plus_inside = spec.contains(a + eps * normal);
    const bool minus_inside = spec.contains(a - eps * normal);
    if (plus_inside && !minus_inside) normal = -normal;
    data.normal = normal;
    const bool two_active = second < 1e-6 * scale;
    const ScalarField& field = spec.primitive_field(data.active_primitive);
    const bool kink = field.has_kinks() && field.kink_gap(real_view(spec.lift(a))) < 1e-6 * scale;
    if (two_active || kink) data.kind = BoundaryPointData::Kind::junction;
  }
  fill_tangents(data);
  return data;
}

std::vector<Point> sample_interior(const DomainSpec& spec, int count, std::uint64_t seed) {
  if (count < 1) throw PreconditionError("sample count must be >= 1");
  const int m = spec.dimension();
  const double radius = spec.bounding_radius();
  std::vector<Point> points;
  Rng rng = make_rng(seed, 0x1e7e);
  const long attempts = std::max<long>(2000, 400L * count);
  for (long k = 0; k < attempts && static_cast<int>(points.size()) < count; ++k) {
    const Point u = random_unit(rng, m);
    const double r = k % 2 == 0 ? radius * std::pow(uniform(rng), 1.0 / (2.0 * m))
                                : log_uniform(rng, 1e-3 * radius, radius);
    const Point z = r * u;
    if (spec.contains(z)) points.push_back(z);
  }
  if (points.empty()) throw PreconditionError("no interior point found in the bounding window");
  return points;
}

std::vector<BoundaryPointData> sample_boundary(const DomainSpec& spec, int count, std::uint64_t seed) {
  if (count < 1) throw PreconditionError("sample count must be >= 1");
  if (spec.removes_everything()) throw PreconditionError("domain is empty");
  const int m = spec.dimension();
  const double radius = spec.bounding_radius();
  const std::vector<Point> seeds = sample_interior(spec, std::min(count, 256), seed);

  std::vector<BoundaryPointData> out;
  const int puncture_share = spec.local_affine_sets().empty() ? 0 : std::max(1, count / 4);

  append_punctures(spec, puncture_share, seed, nullptr, 0.25 * radius, out);

  for (long k = 0; static_cast<int>(out.size()) < count; ++k) {
    if (k > 64L * count + 64) throw PreconditionError("no boundary found within the bounding radius");
    Rng rng = make_rng(seed, 0x5000 + static_cast<std::uint64_t>(k));
    const RealPoint x = to_real_point(seeds[static_cast<std::size_t>(k) % seeds.size()]);
    const RealPoint u = to_real_point(random_unit(rng, m));
    const double limit = window_exit(x, u, radius);
    if (limit <= 0.0) continue;
    const std::optional<double> t =
        first_change(spec, x, u, limit, std::min(limit, 1e-4 * radius), radius / 256.0, 0.0);
    if (!t) continue;
    out.push_back(boundary_point_data(spec, to_point(RealPoint(x + *t * u))));
  }
  return out;
}

std::vector<BoundaryPointData> sample_boundary_near(const DomainSpec& spec, const Point& focus, double radius,
                                                    int count, std::uint64_t seed) {
  if (count < 1) throw PreconditionError("sample count must be >= 1");
  if (!(radius > 0.0)) throw PreconditionError("focus radius must be positive");
  if (focus.size() != spec.dimension()) throw DimensionError("focus point dimension does not match the domain");
  const int m = spec.dimension();
  std::vector<Point> seeds;
  Rng rng = make_rng(seed, 0x1ea5);
  for (long k = 0; k < 4000L + 400L * count && static_cast<int>(seeds.size()) < 64; ++k) {
    const Point z = focus + radius * std::pow(uniform(rng), 1.0 / (2.0 * m)) * random_unit(rng, m);
    if (z.norm() <= spec.bounding_radius() && spec.contains(z)) seeds.push_back(z);
  }
  if (seeds.empty()) throw PreconditionError("no interior point near the focus");
  std::vector<BoundaryPointData> out;
  if (!spec.local_affine_sets().empty()) append_punctures(spec, std::max(1, count / 4), seed, &focus, radius, out);
  for (long k = 0; static_cast<int>(out.size()) < count; ++k) {
    if (k > 64L * count + 64) throw PreconditionError("no boundary found near the focus");
    Rng ray_rng = make_rng(seed, 0x7000 + static_cast<std::uint64_t>(k));
    const Point& z = seeds[static_cast<std::size_t>(k) % seeds.size()];
    const RealPoint x = to_real_point(z);
    const RealPoint u = to_real_point(random_unit(ray_rng, m));
    const double limit = std::min(window_exit(x, u, spec.bounding_radius()), 2.0 * radius);
    if (limit <= 0.0) continue;
    const std::optional<double> t = first_change(spec, x, u, limit, limit * 1e-4, limit / 64.0, 0.0);
    if (!t) continue;
    const Point b = to_point(RealPoint(x + *t * u));
    if ((b - focus).norm() > radius) continue;
    out.push_back(boundary_point_data(spec, b));
  }
  return out;
}

}  // namespace pcvx
