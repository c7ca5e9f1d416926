#include "pcvx/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace pcvx {

using Op = Instruction::Op;

namespace {

int stack_effect(const Instruction& ins) {
  switch (ins.op) {
    case Op::constant:
    case Op::re:
    case Op::im:
    case Op::abs2:
    case Op::norm2:
      return 1;
    case Op::add:
    case Op::sub:
    case Op::mul:
      return -1;
    case Op::neg:
    case Op::pow:
      return 0;
    case Op::max:
    case Op::min:
      return 1 - ins.arg;
  }
  return 0;
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

class Parser {
 public:
  Parser(std::string_view text, int dimension) : text_(text), dimension_(dimension) {}

  std::vector<Instruction> parse() {
    expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return std::move(program_);
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        program_.push_back({Op::add});
      } else if (accept('-')) {
        term();
        program_.push_back({Op::sub});
      } else {
        return;
      }
    }
  }

  void term() {
    factor();
    while (accept('*')) {
      factor();
      program_.push_back({Op::mul});
    }
  }

  void factor() {
    atom();
    if (accept('^')) {
      skip_space();
      const std::size_t at = pos_;
      const long exponent = integer();
      if (exponent < 1) {
        pos_ = at;
        fail("exponent must be an integer >= 1");
      }
      program_.push_back({Op::pow, static_cast<int>(exponent)});
    }
  }

  long integer() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    long value = 0;
    std::from_chars(text_.data() + start, text_.data() + pos_, value);
    return value;
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])))) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void coordinate(Op op) {
    expect('(');
    skip_space();
    const std::size_t at = pos_;
    const long j = integer();
    if (j < 1 || j > dimension_) {
      pos_ = at;
      fail("coordinate index " + std::to_string(j) + " out of range 1.." + std::to_string(dimension_));
    }
    expect(')');
    program_.push_back({op, static_cast<int>(j)});
  }

  void extremum(Op op) {
    expect('(');
    int count = 0;
    do {
      expr();
      ++count;
    } while (accept(','));
    expect(')');
    if (count == 1) return;
    program_.push_back({op, count});
  }

  void atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      factor();
      program_.push_back({Op::neg});
      return;
    }
    if (c == '(') {
      ++pos_;
      expr();
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t at = pos_;
      const std::string name = identifier();
      if (name == "re") return coordinate(Op::re);
      if (name == "im") return coordinate(Op::im);
      if (name == "abs2") return coordinate(Op::abs2);
      if (name == "norm2") {
        program_.push_back({Op::norm2});
        return;
      }
      if (name == "max") return extremum(Op::max);
      if (name == "min") return extremum(Op::min);
      pos_ = at;
      fail("unknown function '" + name + "'");
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  void number() {
    const std::size_t start = pos_;
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc()) fail("malformed number");
    pos_ = static_cast<std::size_t>(end - text_.data());
    if (pos_ == start) fail("malformed number");
    program_.push_back({Op::constant, 0, value});
  }

  std::string_view text_;
  int dimension_;
  std::size_t pos_ = 0;
  std::vector<Instruction> program_;
};

}  // namespace

ScalarField::ScalarField(int dimension, std::vector<Instruction> program)
    : dimension_(dimension), program_(std::move(program)) {
  if (dimension_ < 1) throw DimensionError("field dimension must be positive");
  long depth = 0;
  long peak = 0;
  for (const Instruction& ins : program_) {
    switch (ins.op) {
      case Op::re:
      case Op::im:
      case Op::abs2:
        if (ins.arg < 1 || ins.arg > dimension_) throw DimensionError("coordinate index out of range");
        break;
      case Op::pow:
        if (ins.arg < 1) throw Error("pow exponent must be >= 1");
        break;
      case Op::max:
      case Op::min:
        if (ins.arg < 2) throw Error("max/min need at least two operands");
        has_kinks_ = true;
        if (depth < ins.arg) throw Error("malformed program");
        break;
      case Op::add:
      case Op::sub:
      case Op::mul:
        if (depth < 2) throw Error("malformed program");
        break;
      case Op::neg:
        if (depth < 1) throw Error("malformed program");
        break;
      default:
        break;
    }
    depth += stack_effect(ins);
    peak = std::max(peak, depth);
  }
  if (depth != 1) throw Error("malformed program: stack depth " + std::to_string(depth) + " at end");
  if (peak > static_cast<long>(kStackLimit)) throw Error("expression too deeply nested");
}

double ScalarField::operator()(const Point& z) const { return evaluate<double>(real_view(z)); }

double ScalarField::kink_gap(std::span<const double> x) const {
  if (!has_kinks_) return std::numeric_limits<double>::infinity();
  // Re-run the program, recording operand spreads at max/min nodes.
  std::vector<double> stack;
  stack.reserve(16);
  double gap = std::numeric_limits<double>::infinity();
  for (const Instruction& ins : program_) {
    std::vector<Instruction> single{ins};
    switch (ins.op) {
      case Op::max:
      case Op::min: {
        const std::size_t first = stack.size() - static_cast<std::size_t>(ins.arg);
        std::vector<double> operands(stack.begin() + static_cast<long>(first), stack.end());
        std::sort(operands.begin(), operands.end());
        const double spread = ins.op == Op::max ? operands[operands.size() - 1] - operands[operands.size() - 2]
                                                : operands[1] - operands[0];
        gap = std::min(gap, spread);
        stack.resize(first);
        stack.push_back(ins.op == Op::max ? operands.back() : operands.front());
        break;
      }
      case Op::constant:
        stack.push_back(ins.value);
        break;
      case Op::re:
        stack.push_back(x[2 * (ins.arg - 1)]);
        break;
      case Op::im:
        stack.push_back(x[2 * (ins.arg - 1) + 1]);
        break;
      case Op::abs2:
        stack.push_back(x[2 * (ins.arg - 1)] * x[2 * (ins.arg - 1)] + x[2 * (ins.arg - 1) + 1] * x[2 * (ins.arg - 1) + 1]);
        break;
      case Op::norm2: {
        double s = 0.0;
        for (double v : x) s += v * v;
        stack.push_back(s);
        break;
      }
      case Op::add: {
        const double b = stack.back();
        stack.pop_back();
        stack.back() += b;
        break;
      }
      case Op::sub: {
        const double b = stack.back();
        stack.pop_back();
        stack.back() -= b;
        break;
      }
      case Op::mul: {
        const double b = stack.back();
        stack.pop_back();
        stack.back() *= b;
        break;
      }
      case Op::neg:
        stack.back() = -stack.back();
        break;
      case Op::pow: {
        const double base = stack.back();
        double result = base;
        for (int k = 1; k < ins.arg; ++k) result *= base;
        stack.back() = result;
        break;
      }
    }
  }
  return gap;
}

std::string ScalarField::to_string() const {
  std::vector<std::string> stack;
  for (const Instruction& ins : program_) {
    switch (ins.op) {
      case Op::constant:
        stack.push_back(ins.value < 0 ? "(-" + format_number(-ins.value) + ")" : format_number(ins.value));
        break;
      case Op::re:
        stack.push_back("re(" + std::to_string(ins.arg) + ")");
        break;
      case Op::im:
        stack.push_back("im(" + std::to_string(ins.arg) + ")");
        break;
      case Op::abs2:
        stack.push_back("abs2(" + std::to_string(ins.arg) + ")");
        break;
      case Op::norm2:
        stack.push_back("norm2");
        break;
      case Op::add:
      case Op::sub:
      case Op::mul: {
        std::string b = std::move(stack.back());
        stack.pop_back();
        const char* symbol = ins.op == Op::add ? " + " : ins.op == Op::sub ? " - " : " * ";
        stack.back() = "(" + stack.back() + symbol + b + ")";
        break;
      }
      case Op::neg:
        stack.back() = "(-" + stack.back() + ")";
        break;
      case Op::pow:
        stack.back() = "(" + stack.back() + ")^" + std::to_string(ins.arg);
        break;
      case Op::max:
      case Op::min: {
        const std::size_t first = stack.size() - static_cast<std::size_t>(ins.arg);
        std::string text = ins.op == Op::max ? "max(" : "min(";
        for (std::size_t k = first; k < stack.size(); ++k) text += (k > first ? ", " : "") + stack[k];
        stack.resize(first);
        stack.push_back(text + ")");
        break;
      }
    }
  }
  return stack.back();
}

ScalarField parse_field(std::string_view text, int dimension) {
  if (dimension < 1) throw DimensionError("dimension must be positive, got " + std::to_string(dimension));
  return ScalarField(dimension, Parser(text, dimension).parse());
}

double eval_field(const ScalarField& field, const Point& z) {
  if (z.size() != field.dimension()) {
    throw DimensionError("point has " + std::to_string(z.size()) + " coordinates, field expects " +
                         std::to_string(field.dimension()));
  }
  return field(z);
}

double eval_field(const ScalarField& field, std::span<const double> x) { return field.evaluate(x); }

RealVector numeric_gradient(const ScalarField& field, const Point& z, double h) {
  RealVector x = to_real(z);
  const Eigen::Index m = x.size();
  RealVector g(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double xi = x(i);
    const double step = h * std::max(1.0, std::abs(xi));
    x(i) = xi + step;
    const double fp = field.evaluate<double>({x.data(), static_cast<std::size_t>(m)});
    x(i) = xi - step;
    const double fm = field.evaluate<double>({x.data(), static_cast<std::size_t>(m)});
    x(i) = xi;
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

Derivatives numeric_derivatives(const ScalarField& field, const Point& z, double h) {
  if (!(h > 0.0)) throw PreconditionError("finite-difference step must be positive");
  if (z.size() != field.dimension()) throw DimensionError("point dimension does not match field");
  RealVector x = to_real(z);
  const Eigen::Index m = x.size();
  const std::size_t size = static_cast<std::size_t>(m);
  auto f = [&]() { return field.evaluate<double>({x.data(), size}); };

  RealVector steps(m);
  for (Eigen::Index i = 0; i < m; ++i) steps(i) = h * std::max(1.0, std::abs(x(i)));

  const double f0 = f();
  Derivatives d{RealVector(m), Eigen::MatrixXd(m, m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    const double xi = x(i);
    const double hi = steps(i);
    x(i) = xi + hi;
    const double fp = f();
    x(i) = xi - hi;
    const double fm = f();
    x(i) = xi;
    d.gradient(i) = (fp - fm) / (2.0 * hi);
    d.hessian(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double xi = x(i);
      const double xj = x(j);
      const double hi = steps(i);
      const double hj = steps(j);
      x(i) = xi + hi;
      x(j) = xj + hj;
      const double fpp = f();
      x(j) = xj - hj;
      const double fpm = f();
      x(i) = xi - hi;
      const double fmm = f();
      x(j) = xj + hj;
      const double fmp = f();
      x(i) = xi;
      x(j) = xj;
      const double value = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
      d.hessian(i, j) = value;
      d.hessian(j, i) = value;
    }
  }
  return d;
}

}  // namespace pcvx
