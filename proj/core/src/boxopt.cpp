#include "handemb/boxopt.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "handemb/errors.hpp"

namespace handemb::boxopt {

Bounds::Bounds(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw std::invalid_argument("bounds: lower and upper differ in size");
  }
  for (Eigen::Index k = 0; k < lower_.size(); ++k) {
    if (!(lower_[k] <= upper_[k])) {
      throw std::invalid_argument("bounds: lower exceeds upper at index " + std::to_string(k));
    }
  }
}

void SolveOptions::validate() const {
  if (max_iterations <= 0 || !(gradient_step > 0.0) || !(objective_tolerance > 0.0) ||
      !(step_tolerance > 0.0) || !(initial_step > 0.0) || history <= 0) {
    throw std::invalid_argument("solve options must all be positive");
  }
}

namespace {

double evaluate(const Objective& f, const Vector& x) {
  const double value = f(x);
  if (!std::isfinite(value)) throw NonFiniteObjective("objective is not finite");
  return value;
}

struct CurvaturePair {
  Vector s;
  Vector y;
};

// Binding coordinates sit on a bound with the gradient pushing outward.
Eigen::Array<bool, Eigen::Dynamic, 1> free_mask(const Vector& x, const Vector& g,
                                                const Bounds& bounds) {
  Eigen::Array<bool, Eigen::Dynamic, 1> mask(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const bool at_lower = x[k] <= bounds.lower()[k] && g[k] > 0.0;
    const bool at_upper = x[k] >= bounds.upper()[k] && g[k] < 0.0;
    mask[k] = !(at_lower || at_upper);
  }
  return mask;
}

Vector masked(const Vector& v, const Eigen::Array<bool, Eigen::Dynamic, 1>& mask) {
  return mask.select(v, 0.0).matrix();
}

// Two-loop recursion restricted to the free subspace.
Vector quasi_newton_direction(const Vector& pg, const std::deque<CurvaturePair>& memory,
                              const Eigen::Array<bool, Eigen::Dynamic, 1>& mask) {
  Vector q = pg;
  std::vector<double> alpha(memory.size(), 0.0);
  std::vector<double> rho(memory.size(), 0.0);
  std::vector<Vector> s(memory.size()), y(memory.size());
  for (std::size_t i = 0; i < memory.size(); ++i) {
    s[i] = masked(memory[i].s, mask);
    y[i] = masked(memory[i].y, mask);
    const double sy = s[i].dot(y[i]);
    rho[i] = sy > std::numeric_limits<double>::min() ? 1.0 / sy : 0.0;
  }
  for (std::size_t i = memory.size(); i-- > 0;) {
    if (rho[i] == 0.0) continue;
    alpha[i] = rho[i] * s[i].dot(q);
    q -= alpha[i] * y[i];
  }
  double gamma = 1.0;
  for (std::size_t i = memory.size(); i-- > 0;) {
    if (rho[i] == 0.0) continue;
    gamma = 1.0 / (rho[i] * y[i].squaredNorm());
    break;
  }
  Vector r = gamma * q;
  for (std::size_t i = 0; i < memory.size(); ++i) {
    if (rho[i] == 0.0) continue;
    const double beta = rho[i] * y[i].dot(r);
    r += (alpha[i] - beta) * s[i];
  }
  return -masked(r, mask);
}

struct LineSearchResult {
  bool accepted = false;
  Vector x;
  double f = 0.0;
};

// Backtracking along the projection arc with an Armijo condition.
LineSearchResult projected_search(const Objective& f, const Vector& x, double fx,
                                  const Vector& g, const Vector& direction, double step,
                                  const Bounds& bounds) {
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 40;
  for (int i = 0; i < kMaxHalvings; ++i, step *= 0.5) {
    Vector trial = bounds.clamp(x + step * direction);
    if (trial == x) break;
    const double ft = f(trial);
    if (!std::isfinite(ft)) continue;
    if (ft < fx && ft <= fx + kArmijo * g.dot(trial - x)) return {true, std::move(trial), ft};
  }
  return {};
}

}  // namespace

Vector finite_diff_gradient(const Objective& f, const Vector& x, double step) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + step;
    const double forward = evaluate(f, probe);
    probe[k] = x[k] - step;
    const double backward = evaluate(f, probe);
    probe[k] = x[k];
    g[k] = (forward - backward) / (2.0 * step);
  }
  return g;
}

SolveResult minimize(const Objective& f, const Vector& x0, const Bounds& bounds,
                     const SolveOptions& options) {
  options.validate();
  if (x0.size() != bounds.size()) throw std::invalid_argument("minimize: x0 and bounds differ in size");
  if (!x0.allFinite()) throw std::invalid_argument("minimize: x0 is not finite");

  SolveResult result;
  Vector x = bounds.clamp(x0);
  double fx = evaluate(f, x);
  Vector g = finite_diff_gradient(f, x, options.gradient_step);
  result.trace.push_back(fx);

  std::deque<CurvaturePair> memory;
  for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
    const auto mask = free_mask(x, g, bounds);
    const Vector pg = masked(g, mask);
    const double pg_norm = pg.lpNorm<Eigen::Infinity>();
    if (pg_norm < options.step_tolerance) {
      result.converged = true;
      break;
    }

    LineSearchResult step;
    if (!memory.empty()) {
      const Vector d = quasi_newton_direction(pg, memory, mask);
      if (d.dot(pg) < 0.0) step = projected_search(f, x, fx, g, d, 1.0, bounds);
    }
    if (!step.accepted) {
      memory.clear();
      step = projected_search(f, x, fx, g, -pg, options.initial_step / pg_norm, bounds);
    }
    if (!step.accepted) {
      // No descent found along the projected gradient: numerically stationary.
      result.converged = true;
      break;
    }

    const double decrease = fx - step.f;
    if (decrease < options.objective_tolerance * std::abs(fx)) {
      result.converged = true;
      break;
    }

    Vector g_new = finite_diff_gradient(f, step.x, options.gradient_step);
    CurvaturePair pair{step.x - x, g_new - g};
    if (pair.s.dot(pair.y) > 1e-12 * pair.y.squaredNorm()) {
      memory.push_back(std::move(pair));
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }
    x = std::move(step.x);
    fx = step.f;
    g = std::move(g_new);
    result.trace.push_back(fx);
    ++result.iterations;
  }

  result.x = std::move(x);
  result.objective = fx;
  return result;
}

}  // namespace handemb::boxopt
