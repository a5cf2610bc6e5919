#pragma once

#include "orlicz/grid.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace orlicz {

/// Seeded generator with a fixed mapping to doubles, so sequences agree
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

using Params = std::map<std::string, double>;

struct GeneratorInfo {
  std::string name;
  std::string params;
  std::string description;
};

const std::vector<GeneratorInfo>& generator_catalog();

/// Samples a named generator. `spec` is a catalog name, optionally with a seed
/// argument as in "random_smooth(7)". Throws Errc::unknown_generator.
GridFunction generate(const std::string& spec, const Grid& grid, const Params& params = {});

}  // namespace orlicz
