#include "pcvx/domain_file.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcvx/catalog.hpp"

namespace pcvx {

namespace {

using nlohmann::json;

Complex complex_value(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw PreconditionError(path + ": expected a number or [re, im]");
}

Point point_value(const json& v, int n, const std::string& path) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) {
    throw DimensionError(path + ": expected an array of " + std::to_string(n) + " complex numbers");
  }
  Point z(n);
  for (int k = 0; k < n; ++k) z(k) = complex_value(v[static_cast<std::size_t>(k)], path + "[" + std::to_string(k) + "]");
  return z;
}

RegionNode node_value(const json& v, int n, const std::string& path) {
  if (!v.is_object()) throw PreconditionError(path + ": expected an object");
  if (v.contains("field")) {
    if (!v["field"].is_string()) throw PreconditionError(path + ".field: expected a string");
    try {
      return primitive(parse_field(v["field"].get<std::string>(), n));
    } catch (const ParseError& e) {
      std::string message = e.what();
      message.resize(message.rfind(" at position"));
      throw ParseError(path + ".field: " + message, e.position());
    }
  }
  for (const char* key : {"union", "intersection"}) {
    if (!v.contains(key)) continue;
    const json& list = v[key];
    if (!list.is_array() || list.empty()) throw PreconditionError(path + "." + key + ": expected a non-empty array");
    std::vector<RegionNode> children;
    for (std::size_t k = 0; k < list.size(); ++k) {
      children.push_back(node_value(list[k], n, path + "." + key + "[" + std::to_string(k) + "]"));
    }
    return std::string(key) == "union" ? union_of(std::move(children)) : intersection_of(std::move(children));
  }
  if (v.contains("complement")) return complement_of(node_value(v["complement"], n, path + ".complement"));
  if (v.contains("minus_affine")) {
    RegionNode child = node_value(v["minus_affine"], n, path + ".minus_affine");
    if (!v.contains("base")) throw PreconditionError(path + ": minus_affine needs a base point");
    const Point base = point_value(v["base"], n, path + ".base");
    const json span = v.value("span", json::array());
    if (!span.is_array()) throw PreconditionError(path + ".span: expected an array of vectors");
    ComplexMatrix vectors(n, static_cast<Eigen::Index>(span.size()));
    for (std::size_t k = 0; k < span.size(); ++k) {
      vectors.col(static_cast<Eigen::Index>(k)) = point_value(span[k], n, path + ".span[" + std::to_string(k) + "]");
    }
    // Orthonormalize; the affine set needs orthonormal columns.
    ComplexMatrix q = vectors;
    if (q.cols() > 0) {
      Eigen::HouseholderQR<ComplexMatrix> qr(vectors);
      q = qr.householderQ() * ComplexMatrix::Identity(n, vectors.cols());
    }
    return minus_affine(std::move(child), AffineSet(base, q));
  }
  throw PreconditionError(path + ": unknown node (expected field, union, intersection, complement or minus_affine)");
}

}  // namespace

DomainSpec domain_from_json(const json& doc) {
  if (!doc.is_object()) throw PreconditionError("domain document must be a JSON object");
  if (doc.contains("catalog")) {
    ParameterMap params;
    if (doc.contains("params")) {
      for (const auto& [key, value] : doc["params"].items()) {
        if (!value.is_number()) throw PreconditionError("params." + key + ": expected a number");
        params[key] = value.get<double>();
      }
    }
    return catalog_domain(doc["catalog"].get<std::string>(), params);
  }
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer()) {
    throw PreconditionError("dimension: expected an integer");
  }
  if (!doc.contains("tree")) throw PreconditionError("tree: missing");
  const int n = doc["dimension"].get<int>();
  if (n < 1 || n > DomainSpec::kMaxDimension) throw DimensionError("dimension out of range");
  const double radius = doc.value("bounding_radius", DomainSpec::kDefaultRadius);
  DomainSpec spec(n, node_value(doc["tree"], n, "tree"), radius);
  spec.name = doc.value("name", std::string("file"));
  return spec;
}

DomainSpec load_domain(const std::string& source) {
  if (std::filesystem::is_regular_file(source)) {
    std::ifstream in(source);
    std::stringstream text;
    text << in.rdbuf();
    json doc;
    try {
      doc = json::parse(text.str());
    } catch (const json::parse_error& e) {
      throw ParseError(source + ": malformed JSON", e.byte);
    }
    return domain_from_json(doc);
  }
  const auto [name, params] = parse_catalog_reference(source);
  return catalog_domain(name, params);
}

json domain_summary(const DomainSpec& spec) {
  json out;
  out["name"] = spec.name;
  out["parameters"] = spec.parameters;
  out["dimension"] = spec.dimension();
  out["bounding_radius"] = spec.bounding_radius();
  out["formula"] = spec.describe();
  return out;
}

}  // namespace pcvx
