#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace pcvx {

/// Outcome of a pinned reproduction recipe. `payload` holds every number
/// and verdict plus a "checks" list; it is deterministic in the seed and
/// independent of the thread count.
struct ReproduceResult {
  std::string name;
  nlohmann::json payload;
  bool expected = false;  // every check passed
};

const std::vector<std::string>& reproduce_targets();

/// Runs one recipe: lemma5, theorem1-crosscheck, example10, example13,
/// example14, example15, prop6-quadrant, prop8-hartogsfigure, ratio-tests.
ReproduceResult reproduce(const std::string& name, std::uint64_t seed = 1);

}  // namespace pcvx
