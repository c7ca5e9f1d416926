#include "pcvx/catalog.hpp"

#include <cmath>
#include <sstream>

namespace pcvx {

namespace {

std::string num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string abs2(int j) { return "abs2(" + std::to_string(j) + ")"; }

int integer_param(const ParameterMap& p, const std::string& key, int lo, int hi) {
  const double v = p.at(key);
  if (v != std::floor(v) || v < lo || v > hi) {
    throw PreconditionError("parameter " + key + " must be an integer in [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

ParameterMap resolve(const CatalogEntry& entry, const ParameterMap& given) {
  ParameterMap out = entry.defaults;
  out.emplace("R", DomainSpec::kDefaultRadius);
  for (const auto& [key, value] : given) {
    if (!out.count(key)) throw PreconditionError("catalog domain '" + entry.name + "' has no parameter '" + key + "'");
    if (!std::isfinite(value)) throw PreconditionError("parameter " + key + " must be finite");
    out[key] = value;
  }
  if (!(out["R"] > 0.0)) throw PreconditionError("bounding radius R must be positive");
  return out;
}

std::string describe_params(const ParameterMap& p) {
  std::string text;
  for (const auto& [key, value] : p) text += (text.empty() ? "" : ",") + key + "=" + num(value);
  return text;
}

RegionNode cone_component(int j) {
  // {sum_{k != j} |z_k|^2 < |z_j|^2}
  std::string f;
  for (int k = 1; k <= 3; ++k) {
    if (k == j) continue;
    f += (f.empty() ? "" : " + ") + abs2(k);
  }
  return primitive(f + " - " + abs2(j), 3);
}

RegionNode coordinate_line_removed(RegionNode child, int axis) {
  Point base = Point::Zero(3);
  ComplexMatrix span = ComplexMatrix::Zero(3, 1);
  span(axis - 1, 0) = 1.0;
  return minus_affine(std::move(child), AffineSet(base, span));
}

}  // namespace

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = {
      {"ball", "unit ball {norm2 - 1 < 0} in C^n", {{"n", 2}}},
      {"polydisc", "unit polydisc: intersection of {|z_j|^2 - 1 < 0}", {{"n", 2}}},
      {"half-space", "{Re z_1 < 0} in C^n", {{"n", 2}}},
      {"tube", "tube over the unit disc {(Re z_1)^2 + (Re z_2)^2 - 1 < 0} in C^2", {}},
      {"quadrant", "{Re z > 0} and {Im z > 0} in C", {}},
      {"l-tube", "tube over the L-shaped base (-1,1)x(-1,0) u (-1,0)x(-1,1) in C^2", {}},
      {"hartogs-figure", "{|z1|<1,|z2|<q} u {p<|z1|<1,|z2|<1} in C^2", {{"p", 0.5}, {"q", 0.5}}},
      {"model-hor",
       "{Re z_1 + (Im z_1)^2 + |z_2|^2 + ... + |z_{n-1}|^2 + c (Im z_n)^2 - (Re z_n)^2 < 0}, c < 1",
       {{"c", 0.5}, {"n", 2}}},
      {"lemma5-E", "bidisc of radius eps intersected with {Re z + (Im z)^2 - (Re w)^2 + c (Im w)^2 < 0}",
       {{"c", 0.5}, {"eps", 0.5}}},
      {"example10", "{|z-1|<2} u {|z+1|<2} in C", {}},
      {"example13", "{|z3|^2 < |z1|^2 + |z2|^2 < 4|z3|^2} in C^3", {}},
      {"example14", "unit ball of C^3 minus l1 = C e1 (variant 1), or minus l1 and l2 = C e2 (variant 2)",
       {{"variant", 1}}},
      {"example15", "union over j of D_j = {sum_{k!=j} |z_k|^2 < |z_j|^2} in C^3", {}},
      {"example15-component", "D_j = {sum_{k!=j} |z_k|^2 < |z_j|^2} in C^3", {{"j", 3}}},
  };
  return entries;
}

DomainSpec catalog_domain(const std::string& name, const ParameterMap& params) {
  const CatalogEntry* entry = nullptr;
  for (const CatalogEntry& e : catalog_entries()) {
    if (e.name == name) entry = &e;
  }
  if (entry == nullptr) throw Error("unknown catalog domain '" + name + "'");
  const ParameterMap p = resolve(*entry, params);
  const double radius = p.at("R");

  auto finish = [&](int n, RegionNode root) {
    DomainSpec spec(n, std::move(root), radius);
    spec.name = name;
    spec.parameters = describe_params(p);
    return spec;
  };

  if (name == "ball") {
    const int n = integer_param(p, "n", 1, DomainSpec::kMaxDimension);
    return finish(n, primitive("norm2 - 1", n));
  }
  if (name == "polydisc") {
    const int n = integer_param(p, "n", 1, DomainSpec::kMaxDimension);
    std::vector<RegionNode> parts;
    for (int j = 1; j <= n; ++j) parts.push_back(primitive(abs2(j) + " - 1", n));
    return finish(n, intersection_of(std::move(parts)));
  }
  if (name == "half-space") {
    const int n = integer_param(p, "n", 1, DomainSpec::kMaxDimension);
    return finish(n, primitive("re(1)", n));
  }
  if (name == "tube") return finish(2, primitive("re(1)^2 + re(2)^2 - 1", 2));
  if (name == "quadrant") return finish(1, intersection_of({primitive("-re(1)", 1), primitive("-im(1)", 1)}));
  if (name == "l-tube") {
    return finish(2, union_of({primitive("max(re(1) - 1, -re(1) - 1, re(2), -re(2) - 1)", 2),
                               primitive("max(re(1), -re(1) - 1, re(2) - 1, -re(2) - 1)", 2)}));
  }
  if (name == "hartogs-figure") {
    const double pp = p.at("p");
    const double q = p.at("q");
    if (!(pp > 0.0 && pp < 1.0 && q > 0.0 && q < 1.0)) throw PreconditionError("hartogs-figure needs 0 < p, q < 1");
    return finish(2, union_of({intersection_of({primitive("abs2(1) - 1", 2), primitive("abs2(2) - " + num(q * q), 2)}),
                               intersection_of({primitive(num(pp * pp) + " - abs2(1)", 2),
                                                primitive("abs2(1) - 1", 2), primitive("abs2(2) - 1", 2)})}));
  }
  if (name == "model-hor") {
    const double c = p.at("c");
    if (!(c < 1.0)) throw PreconditionError("model-hor needs c < 1");
    const int n = integer_param(p, "n", 2, DomainSpec::kMaxDimension);
    std::string f = "re(1) + im(1)^2";
    for (int j = 2; j < n; ++j) f += " + " + abs2(j);
    f += " + " + num(c) + "*im(" + std::to_string(n) + ")^2 - re(" + std::to_string(n) + ")^2";
    return finish(n, primitive(f, n));
  }
  if (name == "lemma5-E") {
    const double c = p.at("c");
    const double eps = p.at("eps");
    if (!(c < 1.0)) throw PreconditionError("lemma5-E needs c < 1");
    if (!(eps > 0.0)) throw PreconditionError("lemma5-E needs eps > 0");
    const std::string e2 = num(eps * eps);
    return finish(2, intersection_of({primitive("abs2(1) - " + e2, 2), primitive("abs2(2) - " + e2, 2),
                                      primitive("re(1) + im(1)^2 - re(2)^2 + " + num(c) + "*im(2)^2", 2)}));
  }
  if (name == "example10") {
    return finish(1, union_of({primitive("abs2(1) - 2*re(1) - 3", 1), primitive("abs2(1) + 2*re(1) - 3", 1)}));
  }
  if (name == "example13") {
    return finish(3, intersection_of({primitive("abs2(3) - abs2(1) - abs2(2)", 3),
                                      primitive("abs2(1) + abs2(2) - 4*abs2(3)", 3)}));
  }
  if (name == "example14") {
    const int variant = integer_param(p, "variant", 1, 2);
    RegionNode g = coordinate_line_removed(primitive("norm2 - 1", 3), 1);
    if (variant == 2) g = coordinate_line_removed(std::move(g), 2);
    return finish(3, std::move(g));
  }
  if (name == "example15") return finish(3, union_of({cone_component(1), cone_component(2), cone_component(3)}));
  if (name == "example15-component") return finish(3, cone_component(integer_param(p, "j", 1, 3)));
  throw Error("unknown catalog domain '" + name + "'");
}

std::pair<std::string, ParameterMap> parse_catalog_reference(const std::string& text) {
  const std::size_t colon = text.find(':');
  std::string name = text.substr(0, colon);
  ParameterMap params;
  if (colon == std::string::npos) return {name, params};
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw PreconditionError("catalog parameter '" + item + "' is not key=value");
    try {
      std::size_t used = 0;
      const std::string value = item.substr(eq + 1);
      params[item.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw PreconditionError("catalog parameter '" + item + "' has a non-numeric value");
    }
  }
  return {name, params};
}

}  // namespace pcvx
