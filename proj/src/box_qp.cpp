#include "roboface/box_qp.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace roboface {

void ProjectionSettings::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("projection tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("projection max_iterations must be >= 1");
  if (!(lower < upper)) throw std::invalid_argument("projection bounds require lower < upper");
}

BoxLeastSquares::BoxLeastSquares(Eigen::MatrixXd gram) : gram_(std::move(gram)) {
  if (gram_.rows() != gram_.cols()) throw std::invalid_argument("Gram matrix must be square");
}

namespace {

constexpr int kMaxHalvings = 60;

struct Quadratic {
  const Eigen::MatrixXd& g;
  const Eigen::VectorXd& c;

  // 0.5 x^T G x - c^T x; ||Ax - b||^2 = 2 q + b^T b.
  double value(const Eigen::VectorXd& x) const { return 0.5 * x.dot(g * x) - c.dot(x); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return g * x - c; }
};

Eigen::VectorXd project(Eigen::VectorXd x, double lo, double hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                                   double lo, double hi) {
  Eigen::VectorXd pg = grad;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x[i] <= lo && grad[i] > 0.0) || (x[i] >= hi && grad[i] < 0.0)) pg[i] = 0.0;
  }
  return pg;
}

// Backtracking along the projected path x(t) = P(x + t d); returns true if a
// point with no larger objective was found.
bool projected_search(const Quadratic& q, Eigen::VectorXd& x, double& qx, const Eigen::VectorXd& d,
                      double step, double lo, double hi) {
  for (int k = 0; k < kMaxHalvings && step > 0.0; ++k, step *= 0.5) {
    Eigen::VectorXd trial = project(x + step * d, lo, hi);
    const double qt = q.value(trial);
    if (qt <= qx) {
      x = std::move(trial);
      qx = qt;
      return true;
    }
  }
  return false;
}

}  // namespace

BoxSolveResult BoxLeastSquares::solve(const Eigen::VectorXd& atb, double btb,
                                      const ProjectionSettings& settings,
                                      const Eigen::VectorXd& warm_start,
                                      const IterationCallback& callback) const {
  settings.validate();
  const Eigen::Index n = gram_.rows();
  if (atb.size() != n) throw std::invalid_argument("A^T b length does not match the Gram matrix");
  const double lo = settings.lower;
  const double hi = settings.upper;

  Eigen::VectorXd x;
  if (warm_start.size() == n) {
    x = project(warm_start, lo, hi);
  } else if (warm_start.size() == 0) {
    x = project(Eigen::VectorXd::Zero(n), lo, hi);
  } else {
    throw std::invalid_argument("warm start length does not match the problem size");
  }

  const Quadratic q{gram_, atb};
  double qx = q.value(x);
  BoxSolveResult out;

  int it = 0;
  for (;;) {
    Eigen::VectorXd grad = q.gradient(x);
    Eigen::VectorXd pg = projected_gradient(x, grad, lo, hi);
    out.projected_gradient_norm = n == 0 ? 0.0 : 2.0 * pg.lpNorm<Eigen::Infinity>();
    if (out.projected_gradient_norm <= settings.tolerance) {
      out.converged = true;
      break;
    }
    if (it >= settings.max_iterations) break;
    ++it;

    // Projected-gradient step with the exact line-search length.
    const double pgpg = pg.squaredNorm();
    const double curvature = pg.dot(gram_ * pg);
    double step = curvature > 0.0 ? pgpg / curvature : (hi - lo) / pg.lpNorm<Eigen::Infinity>();
    projected_search(q, x, qx, -pg, step, lo, hi);

    // Newton step restricted to the free variables.
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (x[i] > lo && x[i] < hi) free.push_back(i);
    }
    if (!free.empty()) {
      const auto nf = static_cast<Eigen::Index>(free.size());
      grad = q.gradient(x);
      Eigen::MatrixXd gff(nf, nf);
      Eigen::VectorXd gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf[a] = grad[free[a]];
        for (Eigen::Index b = 0; b < nf; ++b) gff(a, b) = gram_(free[a], free[b]);
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(gff);
      if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd delta = ldlt.solve(-gf);
        if (delta.allFinite() && delta.dot(gf) < 0.0) {
          Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
          for (Eigen::Index a = 0; a < nf; ++a) full[free[a]] = delta[a];
          projected_search(q, x, qx, full, 1.0, lo, hi);
        }
      }
    }
    if (callback) callback(it, x, std::max(0.0, 2.0 * qx + btb));
  }

  out.x = std::move(x);
  out.iterations = it;
  out.objective = std::max(0.0, 2.0 * qx + btb);
  return out;
}

}  // namespace roboface
