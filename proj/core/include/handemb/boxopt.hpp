#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace handemb::boxopt {

using Vector = Eigen::VectorXd;
using Objective = std::function<double(const Vector&)>;

/// Box constraints lower <= x <= upper.
class Bounds {
 public:
  Bounds() = default;
  /// Throws std::invalid_argument on size mismatch or lower > upper.
  Bounds(Vector lower, Vector upper);

  Eigen::Index size() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  Vector clamp(const Vector& x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }
  bool contains(const Vector& x) const {
    return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
  }

 private:
  Vector lower_;
  Vector upper_;
};

struct SolveOptions {
  int max_iterations = 100;
  /// Central-difference step for gradient estimates.
  double gradient_step = 1e-6;
  /// Stop once an accepted step decreases f by less than this fraction of |f|.
  double objective_tolerance = 1e-8;
  /// Stop once the infinity norm of the projected gradient falls below this.
  double step_tolerance = 1e-10;
  /// Largest coordinate change of the first (steepest-descent) trial step.
  double initial_step = 0.1;
  /// Number of curvature pairs kept by the quasi-Newton update.
  int history = 20;

  /// Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

struct SolveResult {
  Vector x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective of the start point and of every accepted iterate.
  std::vector<double> trace;
};

/// Central-difference gradient (f(x + h e_k) - f(x - h e_k)) / 2h.
/// Throws NonFiniteObjective if any evaluation is not finite.
Vector finite_diff_gradient(const Objective& f, const Vector& x, double step);

/// Minimizes f over the box with a projected limited-memory quasi-Newton
/// method and finite-difference gradients.
///
/// x0 is clamped into the box first. Every iterate, and the result, lies in the
/// box exactly, and the objective never increases. Hitting max_iterations is
/// reported through `converged == false`. Throws NonFiniteObjective if f is not
/// finite at the start point or during a gradient estimate.
SolveResult minimize(const Objective& f, const Vector& x0, const Bounds& bounds,
                     const SolveOptions& options = {});

}  // namespace handemb::boxopt
