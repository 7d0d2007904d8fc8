#pragma once

#include <stdexcept>
#include <string>

namespace optoforce {

// Bad user input: malformed config, out-of-range field, unknown key.
// CLI exit code 1.
struct validation_error : std::invalid_argument {
  explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// Physically inadmissible or singular configuration (overdamped regime,
// inverted sidebands, resonant sideband with zero damping, under-resolved
// integration, ...). CLI exit code 2.
struct physics_error : std::domain_error {
  enum class kind { generic, singular_configuration };
  kind code = kind::generic;
  explicit physics_error(const std::string& what, kind k = kind::generic)
      : std::domain_error(what), code(k) {}
};

}  // namespace optoforce
