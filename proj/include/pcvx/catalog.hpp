#pragma once

#include <map>
#include <string>
#include <vector>

#include "pcvx/domain.hpp"

namespace pcvx {

using ParameterMap = std::map<std::string, double>;

struct CatalogEntry {
  std::string name;
  std::string summary;
  ParameterMap defaults;  // every accepted parameter with its default
};

const std::vector<CatalogEntry>& catalog_entries();

/// Builds a catalog domain. Unknown parameters and out-of-range values throw
/// PreconditionError; unknown names throw Error. Every entry accepts `R`
/// (bounding radius, default 10).
DomainSpec catalog_domain(const std::string& name, const ParameterMap& params = {});

/// "name:key=value,key=value" -> name and parameters.
std::pair<std::string, ParameterMap> parse_catalog_reference(const std::string& text);

}  // namespace pcvx
