#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace magrobin {

// Uniform grid on [0, T] with node k at k*spacing, T = (n_points-1)*spacing.
// Every weighted inner product in this library uses trapezoid weights on
// these nodes: spacing/2 at the two ends, spacing in the interior.
struct Grid1D {
  int n_points = 0;
  double spacing = 0.0;

  static Grid1D from_truncation(double truncation, int n_points) {
    if (n_points < 3) throw std::invalid_argument("Grid1D: n_points must be >= 3");
    if (!(truncation > 0.0)) throw std::invalid_argument("Grid1D: truncation must be positive");
    return Grid1D{n_points, truncation / (n_points - 1)};
  }

  void validate() const {
    if (n_points < 3) throw std::invalid_argument("Grid1D: n_points must be >= 3");
    if (!(spacing > 0.0)) throw std::invalid_argument("Grid1D: spacing must be positive");
  }

  double truncation() const { return spacing * (n_points - 1); }
  double node(int k) const { return spacing * k; }

  Eigen::VectorXd nodes() const {
    Eigen::VectorXd x(n_points);
    for (int k = 0; k < n_points; ++k) x[k] = spacing * k;
    return x;
  }

  Eigen::VectorXd trapezoid_weights() const {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n_points, spacing);
    w[0] = 0.5 * spacing;
    w[n_points - 1] = 0.5 * spacing;
    return w;
  }

  // Grid with the same truncation and doubled resolution; used for
  // Richardson extrapolation of second-order-accurate eigenvalues.
  Grid1D refined() const { return Grid1D{2 * n_points - 1, 0.5 * spacing}; }
};

// Trapezoid inner product against an explicit weight vector.
inline double weighted_dot(const Eigen::VectorXd& w, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b) {
  return (w.array() * a.array() * b.array()).sum();
}

inline double weighted_norm(const Eigen::VectorXd& w, const Eigen::VectorXd& a) {
  return std::sqrt((w.array() * a.array().square()).sum());
}

}  // namespace magrobin
