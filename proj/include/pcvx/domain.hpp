#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pcvx/expression.hpp"
#include "pcvx/types.hpp"

namespace pcvx {

/// Affine set base + span(columns) with orthonormal columns (k < n).
struct AffineSet {
  AffineSet(Point base, const ComplexMatrix& spanning);

  Point base;
  ComplexMatrix span;

  Eigen::Index dimension() const { return span.cols(); }
  Point project(const Point& z) const;
  double distance(const Point& z) const;
};

/// User-facing region tree. Primitive nodes mean {F < 0}.
struct RegionNode {
  enum class Kind { primitive, union_of, intersection_of, complement_of, minus_affine };

  Kind kind = Kind::primitive;
  std::shared_ptr<const ScalarField> field;
  std::vector<RegionNode> children;
  std::shared_ptr<const AffineSet> removed;
};

RegionNode primitive(ScalarField field);
RegionNode primitive(std::string_view formula, int dimension);
RegionNode union_of(std::vector<RegionNode> children);
RegionNode intersection_of(std::vector<RegionNode> children);
RegionNode complement_of(RegionNode child);
RegionNode minus_affine(RegionNode child, AffineSet removed);

/// Affine embedding C^m -> C^n, zeta -> base + frame * zeta.
struct Embedding {
  Point base;
  ComplexMatrix frame;
};

/// Open set in C^m given by a region tree evaluated in ambient C^n, optionally
/// pulled back through an affine embedding (then m < n, otherwise m = n).
/// All public coordinates are local. Immutable.
class DomainSpec {
 public:
  static constexpr int kMaxDimension = 8;
  static constexpr double kDefaultRadius = 10.0;

  DomainSpec(int dimension, RegionNode root, double bounding_radius = kDefaultRadius);

  int dimension() const { return local_dimension_; }
  int ambient_dimension() const { return ambient_dimension_; }
  double bounding_radius() const { return bounding_radius_; }
  const RegionNode& root() const { return root_; }
  const std::optional<Embedding>& embedding() const { return embedding_; }

  /// Catalog name and parameters, if the spec came from the catalog.
  std::string name;
  std::string parameters;

  bool contains(const Point& z) const;
  /// Same as contains() on interleaved real coordinates; no allocation.
  bool contains_real(const RealPoint& x) const;

  Point lift(const Point& zeta) const;

  /// Pull back through another embedding of the local space (zeta = base + frame * xi).
  DomainSpec restricted(const Embedding& local) const;

  int primitive_count() const { return static_cast<int>(primitives_.size()); }
  const ScalarField& primitive_field(int i) const { return *primitives_[static_cast<std::size_t>(i)]; }
  double primitive_value(int i, const Point& zeta) const;
  double primitive_value_real(int i, const RealPoint& x) const;
  bool primitive_smooth(int i) const { return !primitives_[static_cast<std::size_t>(i)]->has_kinks(); }

  /// Removed affine sets intersected with the local space, in local coordinates.
  const std::vector<AffineSet>& local_affine_sets() const { return local_affine_; }
  /// Local affine sets whose intersection with the slice is the whole slice.
  bool removes_everything() const { return removes_everything_; }

  /// Text form of the region tree (formulas exactly as evaluated).
  std::string describe() const;

 private:
  struct Step {
    enum class Op : std::uint8_t { primitive, any, all, negate, remove } op;
    int arg;
  };
  struct RealAffine {
    RealPoint base;
    RealFrame basis;  // real orthonormal basis of the complex span
  };

  void compile(const RegionNode& node);
  void set_embedding(const Embedding& e);
  RealPoint lift_real(const RealPoint& x) const;
  bool evaluate_ambient(const RealPoint& x) const;

  int local_dimension_;
  int ambient_dimension_;
  double bounding_radius_;
  RegionNode root_;
  std::optional<Embedding> embedding_;
  std::vector<const ScalarField*> primitives_;
  std::vector<const AffineSet*> affine_;
  std::vector<RealAffine> real_affine_;
  RealPoint real_base_;
  RealFrame real_frame_;
  std::vector<Step> program_;
  std::vector<AffineSet> local_affine_;
  bool removes_everything_ = false;
};

bool contains(const DomainSpec& spec, const Point& z);

/// First t in (0, t_max] where membership differs from membership at z,
/// sampling with a first step `first_step`, doubling up to `max_step`, then
/// bisecting to relative tolerance `tolerance`. Returns the changed endpoint.
std::optional<double> first_change(const DomainSpec& spec, const Point& z, const Point& direction, double t_max,
                                   double first_step, double max_step, double tolerance = 1e-12);
std::optional<double> first_change(const DomainSpec& spec, const RealPoint& z, const RealPoint& direction,
                                   double t_max, double first_step, double max_step, double tolerance = 1e-12);

struct DistanceConfig {
  int rays = 8;
  std::uint64_t ray_seed = 0x5eedULL;
  double tolerance = 1e-12;
};

enum class DistanceMethod { projection, edge, affine, ray, none };

std::string to_string(DistanceMethod method);

/// s_D(z) with provenance. `accuracy` estimates the absolute error: small for
/// projection/edge/affine results (a validated nearest-point equation), equal
/// to the value itself for ray results (only an upper bound on |s_D|).
struct SignedDistance {
  double value = 0.0;
  bool finite = true;
  DistanceMethod method = DistanceMethod::none;
  double accuracy = 0.0;
  Point nearest;
};

SignedDistance signed_boundary_distance(const DomainSpec& spec, const Point& z, const DistanceConfig& cfg = {});

/// s_D clipped to the window: +/-R when no boundary was found.
double signed_distance_value(const DomainSpec& spec, const Point& z, const DistanceConfig& cfg = {});

struct BoundaryPointData {
  enum class Kind { regular, junction, puncture };

  Point point;
  Point normal;                   // unit outward, as a vector of R^{2m}
  ComplexMatrix real_tangent;     // m x (2m-1), real orthonormal columns
  ComplexMatrix complex_tangent;  // m x (m-1), Hermitian orthonormal columns
  Kind kind = Kind::regular;
  int active_primitive = -1;

  bool smooth() const { return kind == Kind::regular; }
};

/// Geometry at a boundary point from the locally active primitive.
BoundaryPointData boundary_point_data(const DomainSpec& spec, const Point& a);

std::vector<BoundaryPointData> sample_boundary(const DomainSpec& spec, int count, std::uint64_t seed);

/// Boundary samples within distance `radius` of `focus`: ray exits from
/// interior points of that ball.
std::vector<BoundaryPointData> sample_boundary_near(const DomainSpec& spec, const Point& focus, double radius,
                                                    int count, std::uint64_t seed);

/// Interior points of the window, deterministic in seed.
std::vector<Point> sample_interior(const DomainSpec& spec, int count, std::uint64_t seed);

}  // namespace pcvx
