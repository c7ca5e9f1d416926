#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcvx/types.hpp"

namespace pcvx {

/// Instruction of a postfix (stack) program. `arg` carries the coordinate
/// index (1-based) for re/im/abs2, the exponent for pow and the operand count
/// for max/min.
struct Instruction {
  enum class Op : std::uint8_t { constant, re, im, abs2, norm2, add, sub, mul, neg, pow, max, min };
  Op op;
  int arg = 0;
  double value = 0.0;
};

/// Real-valued field on C^n given as an expression tree, stored in postfix
/// order. Immutable once built.
class ScalarField {
 public:
  ScalarField(int dimension, std::vector<Instruction> program);

  int dimension() const { return dimension_; }
  const std::vector<Instruction>& program() const { return program_; }
  bool has_kinks() const { return has_kinks_; }

  /// Evaluates at a point of R^{2n} in interleaved coordinates.
  template <typename Scalar>
  Scalar evaluate(std::span<const Scalar> x) const;

  double operator()(const Point& z) const;

  /// Smallest gap between the two largest (max) or smallest (min) operands
  /// over all max/min nodes; +inf when the field has none.
  double kink_gap(std::span<const double> x) const;

  /// Fully parenthesized text that parses back to the same tree.
  std::string to_string() const;

 private:
  static constexpr std::size_t kStackLimit = 128;

  int dimension_;
  std::vector<Instruction> program_;
  bool has_kinks_ = false;
};

/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor ('*' factor)*
///   factor := atom ('^' int)?
///   atom   := number | re(j) | im(j) | abs2(j) | norm2 | max(expr, ...)
///           | min(expr, ...) | '(' expr ')' | '-' factor
ScalarField parse_field(std::string_view text, int dimension);

double eval_field(const ScalarField& field, const Point& z);
double eval_field(const ScalarField& field, std::span<const double> x);

struct Derivatives {
  RealVector gradient;
  Eigen::MatrixXd hessian;
};

/// Central differences with per-coordinate step h * max(1, |x_i|).
/// Near max/min kinks the results are one-sided approximations.
Derivatives numeric_derivatives(const ScalarField& field, const Point& z, double h = 1e-5);

RealVector numeric_gradient(const ScalarField& field, const Point& z, double h = 1e-6);

// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar ScalarField::evaluate(std::span<const Scalar> x) const {
  using Op = Instruction::Op;
  if (x.size() != static_cast<std::size_t>(2 * dimension_)) {
    throw DimensionError("field of dimension " + std::to_string(dimension_) + " evaluated at a point with " +
                         std::to_string(x.size()) + " real coordinates");
  }
  std::array<Scalar, kStackLimit> stack;
  std::size_t top = 0;
  for (const Instruction& ins : program_) {
    switch (ins.op) {
      case Op::constant:
        stack[top++] = Scalar(ins.value);
        break;
      case Op::re:
        stack[top++] = x[2 * (ins.arg - 1)];
        break;
      case Op::im:
        stack[top++] = x[2 * (ins.arg - 1) + 1];
        break;
      case Op::abs2: {
        const Scalar a = x[2 * (ins.arg - 1)];
        const Scalar b = x[2 * (ins.arg - 1) + 1];
        stack[top++] = a * a + b * b;
        break;
      }
      case Op::norm2: {
        Scalar s(0);
        for (const Scalar& v : x) s += v * v;
        stack[top++] = s;
        break;
      }
      case Op::add:
        --top;
        stack[top - 1] += stack[top];
        break;
      case Op::sub:
        --top;
        stack[top - 1] -= stack[top];
        break;
      case Op::mul:
        --top;
        stack[top - 1] *= stack[top];
        break;
      case Op::neg:
        stack[top - 1] = -stack[top - 1];
        break;
      case Op::pow: {
        const Scalar base = stack[top - 1];
        Scalar result = base;
        for (int k = 1; k < ins.arg; ++k) result *= base;
        stack[top - 1] = result;
        break;
      }
      case Op::max:
      case Op::min: {
        const std::size_t first = top - static_cast<std::size_t>(ins.arg);
        Scalar best = stack[first];
        for (std::size_t k = first + 1; k < top; ++k) {
          if (ins.op == Op::max ? stack[k] > best : stack[k] < best) best = stack[k];
        }
        top = first;
        stack[top++] = best;
        break;
      }
    }
  }
  return stack[0];
}

}  // namespace pcvx
