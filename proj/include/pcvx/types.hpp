#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pcvx {

using Complex = std::complex<double>;

/// A point (or direction) in C^n. Storage is interleaved (re, im) so the same
/// memory is a point of R^{2n} with coordinates (x_1, y_1, ..., x_n, y_n).
using Point = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Heap-free real coordinates of a point of C^m (m <= 8), interleaved as above.
using RealPoint = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 16, 1>;
using RealFrame = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16>;

/// Membership decisions closer than this to a boundary are considered on it.
inline constexpr double kBoundaryTolerance = 1e-7;
/// Exclusion radius around removed affine sets.
inline constexpr double kAffineTolerance = 1e-12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Wrong number of coordinates for the object it is used with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

inline std::span<const double> real_view(const Point& z) {
  return {reinterpret_cast<const double*>(z.data()), static_cast<std::size_t>(2 * z.size())};
}

inline RealVector to_real(const Point& z) {
  RealVector x(2 * z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    x(2 * j) = z(j).real();
    x(2 * j + 1) = z(j).imag();
  }
  return x;
}

inline RealPoint to_real_point(const Point& z) {
  RealPoint x(2 * z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    x(2 * j) = z(j).real();
    x(2 * j + 1) = z(j).imag();
  }
  return x;
}

inline Point to_point(const RealPoint& x) {
  Point z(x.size() / 2);
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = Complex(x(2 * j), x(2 * j + 1));
  return z;
}

inline Point to_complex(const RealVector& x) {
  Point z(x.size() / 2);
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = Complex(x(2 * j), x(2 * j + 1));
  return z;
}

/// Real Euclidean inner product of two points of C^n seen in R^{2n}.
inline double real_dot(const Point& u, const Point& v) { return u.dot(v).real(); }

/// Orthonormal basis of the Hermitian orthogonal complement of `v` (n x (n-1)).
inline ComplexMatrix hermitian_complement(const Point& v) {
  const Eigen::Index n = v.size();
  Eigen::HouseholderQR<ComplexMatrix> qr(v);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  return q.rightCols(n - 1);
}

/// splitmix64: derives independent stream seeds from (seed, index) pairs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace pcvx
