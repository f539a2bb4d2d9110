#pragma once

// Per-iteration hyperparameters of the adaptive loop: width n_i, activation
// scale beta_i, learning rate alpha_i, plus epochs, tolerance and iteration cap.

#include "gnn/network.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnn {

/// n_i for iteration i >= 1.
struct WidthSchedule {
  enum class Kind { geometric, stepped, list };
  Kind kind = Kind::geometric;
  double base = 4.0;    // N (geometric) or the first width (stepped)
  double ratio = 2.0;   // r
  int step = 0;         // stepped: increment every `period` iterations
  int period = 1;
  std::vector<int> values;  // list: the last entry repeats

  static WidthSchedule geometric(double base, double ratio) { return {Kind::geometric, base, ratio, 0, 1, {}}; }
  static WidthSchedule fixed(int n) { return geometric(n, 1.0); }
  static WidthSchedule stepped(int base, int step, int period) {
    return {Kind::stepped, static_cast<double>(base), 1.0, step, period, {}};
  }
  static WidthSchedule list(std::vector<int> v) { return {Kind::list, 0.0, 1.0, 0, 1, std::move(v)}; }

  [[nodiscard]] int at(int i) const {
    if (i < 1) throw std::invalid_argument("iteration index starts at 1");
    switch (kind) {
      case Kind::geometric: return static_cast<int>(std::lround(base * std::pow(ratio, i - 1)));
      case Kind::stepped: return static_cast<int>(base) + ((i - 1) / period) * step;
      case Kind::list: return values[static_cast<std::size_t>(std::min<int>(i, static_cast<int>(values.size())) - 1)];
    }
    return 0;
  }

  void validate() const {
    switch (kind) {
      case Kind::geometric:
        if (!(base >= 1.0) || !(ratio >= 1.0)) throw std::invalid_argument("width schedule needs N >= 1 and r >= 1");
        break;
      case Kind::stepped:
        if (base < 1.0 || step < 0 || period < 1) throw std::invalid_argument("stepped width schedule is invalid");
        break;
      case Kind::list:
        if (values.empty()) throw std::invalid_argument("width list is empty");
        for (int v : values)
          if (v < 1) throw std::invalid_argument("widths must be >= 1");
        break;
    }
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::geometric: os << base << "*" << ratio << "^(i-1)"; break;
      case Kind::stepped: os << base << "+floor((i-1)/" << period << ")*" << step; break;
      case Kind::list:
        os << "[";
        for (std::size_t k = 0; k < values.size(); ++k) os << (k ? "," : "") << values[k];
        os << "]";
        break;
    }
    return os.str();
  }
};

/// A positive real per iteration: constant, affine a + b(i-1),
/// geometric a + b*ratio^(i-1), or an explicit list.
struct ScaleSchedule {
  enum class Kind { constant, affine, geometric, list };
  Kind kind = Kind::constant;
  double a = 1.0;
  double b = 0.0;
  double ratio = 1.0;
  std::vector<double> values;

  static ScaleSchedule constant(double v) { return {Kind::constant, v, 0.0, 1.0, {}}; }
  static ScaleSchedule affine(double a, double b) { return {Kind::affine, a, b, 1.0, {}}; }
  static ScaleSchedule geometric(double a, double b, double ratio) { return {Kind::geometric, a, b, ratio, {}}; }
  static ScaleSchedule list(std::vector<double> v) { return {Kind::list, 0.0, 0.0, 1.0, std::move(v)}; }

  [[nodiscard]] double at(int i) const {
    if (i < 1) throw std::invalid_argument("iteration index starts at 1");
    switch (kind) {
      case Kind::constant: return a;
      case Kind::affine: return a + b * (i - 1);
      case Kind::geometric: return a + b * std::pow(ratio, i - 1);
      case Kind::list: return values[static_cast<std::size_t>(std::min<int>(i, static_cast<int>(values.size())) - 1)];
    }
    return 0.0;
  }

  void validate(const char* what) const {
    if (kind == Kind::list && values.empty()) throw std::invalid_argument(std::string(what) + " list is empty");
    for (int i = 1; i <= 64; ++i) {
      const double v = at(i);
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " schedule must stay positive");
    }
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::constant: os << a; break;
      case Kind::affine: os << a << "+" << b << "*(i-1)"; break;
      case Kind::geometric: os << a << "+" << b << "*" << ratio << "^(i-1)"; break;
      case Kind::list:
        os << "[";
        for (std::size_t k = 0; k < values.size(); ++k) os << (k ? "," : "") << values[k];
        os << "]";
        break;
    }
    return os.str();
  }
};

/// alpha_i = A * rho^-(i-1)
struct LearningRateSchedule {
  double A = 1e-2;
  double rho = 1.0;

  [[nodiscard]] double at(int i) const { return A * std::pow(rho, -(i - 1)); }

  void validate() const {
    if (!(A > 0.0) || !(rho >= 1.0)) throw std::invalid_argument("learning rate schedule needs A > 0 and rho >= 1");
  }
};

struct Schedules {
  WidthSchedule width;
  ScaleSchedule activation_scale;
  ActivationBase activation = ActivationBase::tanh;
  LearningRateSchedule learning_rate;
  InitStrategy init = InitStrategy::uniform_bias_1d;
  int epochs = 500;
  double tol = 1e-6;
  int max_iterations = 12;

  void validate() const {
    width.validate();
    activation_scale.validate("activation scale");
    learning_rate.validate();
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  }
};

/// The hyperparameters of a single AugmentBasis call.
struct IterationConfig {
  int width = 1;
  Activation activation;
  double learning_rate = 1e-2;
  int epochs = 500;
  InitStrategy init = InitStrategy::uniform_bias_1d;
  std::uint64_t seed = 0;
};

inline IterationConfig iteration_config(const Schedules& s, int i, std::uint64_t seed) {
  IterationConfig c;
  c.width = s.width.at(i);
  c.activation = {s.activation, s.activation_scale.at(i)};
  c.learning_rate = s.learning_rate.at(i);
  c.epochs = s.epochs;
  c.init = s.init;
  // Distinct, reproducible stream per iteration.
  c.seed = seed * 1000003ULL + static_cast<std::uint64_t>(i);
  return c;
}

}  // namespace gnn
