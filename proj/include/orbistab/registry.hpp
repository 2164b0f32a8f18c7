#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "orbistab/dynsys.hpp"

namespace orbistab {

struct RegisteredSystem {
  ControlAffineSystem system;
  OrbitParameterization orbit;
};

using SystemParams = std::map<std::string, double>;
using SystemFactory = std::function<RegisteredSystem(const SystemParams&)>;

/// Register a named system factory. The circle example ships built in under
/// "bh-circle" with parameter a (orbit radius, default 1).
void register_system(const std::string& name, SystemFactory factory);

/// Instantiate a registered system. Throws std::out_of_range for unknown
/// names.
RegisteredSystem make_system(const std::string& name,
                             const SystemParams& params = {});

std::vector<std::string> registered_system_names();

}  // namespace orbistab
