/**
 * @file models.hpp
 * @brief Named ODE models for the experiment harness.
 *
 * New models are added by building a ModelSpec and calling
 * ModelRegistry::add on a registry (typically a copy of builtin()).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "padams/solver.hpp"

namespace padams {

class UnknownModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelSpec {
  std::string name;
  std::vector<std::pair<std::string, double>> parameters;
  State y0;
  OdeSystem system;
  /// Closed-form solution y(t) from y0 at t = 0; empty when the ground truth
  /// has to come from a high-accuracy reference solve.
  std::function<State(double)> exact;

  [[nodiscard]] double parameter(const std::string& key) const {
    for (const auto& [k, v] : parameters) {
      if (k == key) return v;
    }
    throw std::out_of_range("model '" + name + "' has no parameter '" + key + "'");
  }
};

[[nodiscard]] inline ModelSpec linear_test_model() {
  ModelSpec m;
  m.name = "linear_test";
  m.parameters = {{"lambda", -1.0}};
  m.y0 = {1.0};
  m.system = {"linear_test", 1, [](const State& y, double) { return State{-y[0]}; }};
  m.exact = [](double t) { return State{std::exp(-t)}; };
  return m;
}

[[nodiscard]] inline ModelSpec lotka_volterra_model() {
  constexpr double a = 1.0, b = 0.3, c = 1.0, d = 0.7;
  ModelSpec m;
  m.name = "lotka_volterra";
  m.parameters = {{"alpha", a}, {"beta", b}, {"gamma", c}, {"delta", d}};
  m.y0 = {1.0, 1.0};
  m.system = {"lotka_volterra", 2, [](const State& y, double) {
                return State{a * y[0] - b * y[0] * y[1], c * y[0] * y[1] - d * y[1]};
              }};
  return m;
}

[[nodiscard]] inline ModelSpec chua_model() {
  constexpr double alpha = -1.4157;
  constexpr double beta = 0.02944201;
  constexpr double gamma = 0.322673579;
  constexpr double h1 = -0.0197557699;
  constexpr double h3 = -0.0609273571;
  ModelSpec m;
  m.name = "chua";
  m.parameters = {{"alpha", alpha}, {"beta", beta}, {"gamma", gamma}, {"h1", h1}, {"h3", h3}};
  m.y0 = {0.0, 0.003, 0.005};
  m.system = {"chua", 3, [](const State& v, double) {
                const double x = v[0], y = v[1], z = v[2];
                return State{alpha * (y - (1.0 + h1) * x - h3 * x * x * x), x - y + z,
                             -beta * y - gamma * z};
              }};
  return m;
}

class ModelRegistry {
 public:
  /// Registers a model; names must be unique.
  void add(ModelSpec spec) {
    if (spec.name.empty() || !spec.system.rhs || spec.y0.size() != spec.system.dimension) {
      throw std::invalid_argument("ModelRegistry: incomplete model '" + spec.name + "'");
    }
    if (contains(spec.name)) {
      throw std::invalid_argument("ModelRegistry: duplicate model '" + spec.name + "'");
    }
    models_.push_back(std::move(spec));
  }

  [[nodiscard]] bool contains(const std::string& name) const {
    return std::any_of(models_.begin(), models_.end(),
                       [&](const ModelSpec& m) { return m.name == name; });
  }

  [[nodiscard]] const ModelSpec& find(const std::string& name) const {
    for (const auto& m : models_) {
      if (m.name == name) return m;
    }
    std::string known;
    for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
    throw UnknownModelError("unknown model '" + name + "' (known: " + known + ")");
  }

  [[nodiscard]] std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& m : models_) out.push_back(m.name);
    return out;
  }

  [[nodiscard]] static const ModelRegistry& builtin() {
    static const ModelRegistry registry = [] {
      ModelRegistry r;
      r.add(linear_test_model());
      r.add(lotka_volterra_model());
      r.add(chua_model());
      return r;
    }();
    return registry;
  }

 private:
  std::vector<ModelSpec> models_;
};

}  // namespace padams
