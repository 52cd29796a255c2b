#pragma once

#include <Eigen/Core>

#include <functional>

namespace roboface {

/// Stopping rule and bounds for the box-constrained least-squares solver.
struct ProjectionSettings {
  int max_iterations = 500;
  /// Threshold on the infinity norm of the projected gradient of ||Ax - b||^2.
  double tolerance = 1e-8;
  double lower = 0.0;
  double upper = 1.0;

  void validate() const;
};

struct BoxSolveResult {
  Eigen::VectorXd x;
  /// ||Ax - b||^2 at x, evaluated through the Gram form.
  double objective = 0.0;
  double projected_gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Called once per outer iteration with the accepted iterate and its objective.
using IterationCallback = std::function<void(int iteration, const Eigen::VectorXd& x, double objective)>;

/// Minimizes ||Ax - b||^2 over lower <= x <= upper given G = A^T A.
///
/// Each outer iteration takes a projected-gradient step whose length is the
/// exact minimizer of the quadratic along the projected gradient (halved
/// until the projected point does not increase the objective), then a Newton
/// step on the variables strictly inside the box, again accepted only if it
/// does not increase the objective. The objective sequence is therefore
/// non-increasing. Rank-deficient G is allowed; one minimizer is returned.
class BoxLeastSquares {
 public:
  explicit BoxLeastSquares(Eigen::MatrixXd gram);

  /// `atb` is A^T b and `btb` is b^T b. `warm_start` (if non-empty) is clamped
  /// into the box and used as the first iterate.
  BoxSolveResult solve(const Eigen::VectorXd& atb, double btb, const ProjectionSettings& settings,
                       const Eigen::VectorXd& warm_start = {},
                       const IterationCallback& callback = {}) const;

  const Eigen::MatrixXd& gram() const { return gram_; }
  Eigen::Index size() const { return gram_.rows(); }

 private:
  Eigen::MatrixXd gram_;
};

}  // namespace roboface
