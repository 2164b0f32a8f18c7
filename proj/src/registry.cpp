#include "orbistab/registry.hpp"

#include <cmath>
#include <stdexcept>

namespace orbistab {

namespace {

RegisteredSystem make_circle_example(const SystemParams& params) {
  double a = 1.0;
  if (auto it = params.find("a"); it != params.end()) a = it->second;
  if (a <= 0.0) throw std::invalid_argument("circle example needs a > 0");

  ControlAffineSystem sys;
  sys.n = 3;
  sys.m = 1;
  sys.f = [](const Vec& x) {
    Vec out(3);
    out << x[1] + x[0] * x[2], -x[0] + x[1] * x[2], 0.0;
    return out;
  };
  sys.g = [](const Vec& x) {
    Mat out(3, 1);
    out << x[0], x[1], 1.0;
    return out;
  };
  sys.df = [](const Vec& x) {
    Mat J(3, 3);
    J << x[2], 1.0, x[0],
         -1.0, x[2], x[1],
         0.0, 0.0, 0.0;
    return J;
  };
  sys.dg.push_back([](const Vec&) {
    Mat J(3, 3);
    J << 1.0, 0.0, 0.0,
         0.0, 1.0, 0.0,
         0.0, 0.0, 0.0;
    return J;
  });

  OrbitParameterization orbit;
  orbit.s0 = 0.0;
  orbit.s_T = 2.0 * M_PI;
  orbit.xs = [a](double s) {
    Vec out(3);
    out << a * std::sin(s), a * std::cos(s), 0.0;
    return out;
  };
  orbit.dxs = [a](double s) {
    Vec out(3);
    out << a * std::cos(s), -a * std::sin(s), 0.0;
    return out;
  };
  orbit.d2xs = [a](double s) {
    Vec out(3);
    out << -a * std::sin(s), -a * std::cos(s), 0.0;
    return out;
  };
  return {std::move(sys), std::move(orbit)};
}

std::map<std::string, SystemFactory>& registry() {
  static std::map<std::string, SystemFactory> reg = {
      {"bh-circle", make_circle_example},
  };
  return reg;
}

}  // namespace

void register_system(const std::string& name, SystemFactory factory) {
  registry()[name] = std::move(factory);
}

RegisteredSystem make_system(const std::string& name,
                             const SystemParams& params) {
  return registry().at(name)(params);
}

std::vector<std::string> registered_system_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

}  // namespace orbistab
