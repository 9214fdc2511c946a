#pragma once

// Smooth bounded domains seen through their boundary data: arclength
// parametrisation, signed curvature (positive for a convex domain traversed
// counterclockwise), enclosed area, and the tubular strip grid used by the
// boundary-layer solver.
//
// Three sources:
//   * disk(R)        kappa = 1/R everywhere
//   * ellipse(a, b)  kappa(s) from the analytic angle form, arclength by a
//                    dense cumulative table (curvature maxima at the major
//                    axis; s = 0 sits on one of them)
//   * sampled        uniform-in-s curvature samples, periodic linear
//                    interpolation; the curve is reconstructed by integrating
//                    the heading to recover the enclosed area, and closure is
//                    checked
//
// The strip coordinates are (s, t): s arclength along the boundary, t inward
// normal distance. Metric factor a(s,t) = 1 - t*kappa(s); the strip gauge
//   A1(s,t) = -t (1 - t kappa(s)/2)
// vanishes at t = 0, so the holonomy of a loop around the strip is carried by
// a single twist angle zeta * Area / h (mod 2pi) applied on the seam.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace magrobin {

class DomainGeometry {
 public:
  enum class Kind { disk, ellipse, sampled };

  static DomainGeometry disk(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("disk: radius <= 0");
    DomainGeometry g;
    g.kind_ = Kind::disk;
    g.radius_ = radius;
    g.perimeter_ = 2.0 * pi() * radius;
    g.area_ = pi() * radius * radius;
    g.kappa_max_ = g.kappa_min_ = 1.0 / radius;
    g.argmax_ = 0.0;
    return g;
  }

  // Semi-axes a >= b > 0; s = 0 at the point (a, 0) of maximal curvature.
  static DomainGeometry ellipse(double a, double b) {
    if (!(b > 0.0) || !(a >= b)) throw std::invalid_argument("ellipse: need a >= b > 0");
    DomainGeometry g;
    g.kind_ = Kind::ellipse;
    g.axis_a_ = a;
    g.axis_b_ = b;
    g.area_ = pi() * a * b;
    g.build_ellipse_table();
    return g;
  }

  // Curvature samples at s_i = i * length / N, i = 0..N-1, periodic.
  static DomainGeometry sampled(double length, std::vector<double> kappa) {
    if (!(length > 0.0)) throw std::invalid_argument("sampled: length <= 0");
    if (kappa.size() < 8) throw std::invalid_argument("sampled: need >= 8 samples");
    DomainGeometry g;
    g.kind_ = Kind::sampled;
    g.perimeter_ = length;
    g.kappa_samples_ = std::move(kappa);
    g.reconstruct_from_samples();
    return g;
  }

  // CSV with header "s,kappa" and uniformly spaced s starting at 0; the row
  // spacing fixes the perimeter as n * ds.
  static DomainGeometry from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("from_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("s,kappa", 0) != 0)
      throw std::invalid_argument("from_csv: expected header 's,kappa'");
    std::vector<double> svals, kvals;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string a, b;
      if (!std::getline(row, a, ',') || !std::getline(row, b))
        throw std::invalid_argument("from_csv: malformed row '" + line + "'");
      svals.push_back(std::stod(a));
      kvals.push_back(std::stod(b));
    }
    if (svals.size() < 8) throw std::invalid_argument("from_csv: need >= 8 rows");
    double ds = svals[1] - svals[0];
    for (std::size_t i = 0; i < svals.size(); ++i)
      if (std::abs(svals[i] - ds * static_cast<double>(i)) > 1e-9 * ds * svals.size())
        throw std::invalid_argument("from_csv: s column not uniform from 0");
    const double length = ds * static_cast<double>(kvals.size());  // before the move
    return sampled(length, std::move(kvals));
  }

  Kind kind() const { return kind_; }
  double perimeter() const { return perimeter_; }
  double area() const { return area_; }

  double curvature(double s) const {
    switch (kind_) {
      case Kind::disk:
        return 1.0 / radius_;
      case Kind::ellipse:
        return ellipse_curvature(phi_of_s(s));
      case Kind::sampled:
        return sample_interp(s);
    }
    return 0.0;
  }

  double max_curvature() const { return kappa_max_; }
  double min_curvature() const { return kappa_min_; }
  // First arclength position attaining max_curvature (ties break to the
  // smallest s on the scan grid; exactly 0 for disk and ellipse).
  double curvature_argmax() const { return argmax_; }

  // Second derivative of kappa at s, central differences. Only the value at
  // the argmax matters (trial-state envelope width); step chosen against the
  // perimeter scale.
  double curvature_second_derivative(double s) const {
    double dstep = perimeter_ * 1e-3;
    return (curvature(s + dstep) - 2.0 * curvature(s) + curvature(s - dstep)) / (dstep * dstep);
  }

  static constexpr double pi() { return 3.14159265358979323846; }

 private:
  DomainGeometry() = default;

  Kind kind_ = Kind::disk;
  double radius_ = 1.0;
  double axis_a_ = 1.0, axis_b_ = 1.0;
  double perimeter_ = 0.0, area_ = 0.0;
  double kappa_max_ = 0.0, kappa_min_ = 0.0, argmax_ = 0.0;
  std::vector<double> kappa_samples_;  // sampled kind
  std::vector<double> arclen_table_;   // ellipse: cumulative s at uniform phi

  double ellipse_speed(double phi) const {
    double sa = axis_a_ * std::sin(phi), cb = axis_b_ * std::cos(phi);
    return std::sqrt(sa * sa + cb * cb);
  }
  double ellipse_curvature(double phi) const {
    double v = ellipse_speed(phi);
    return axis_a_ * axis_b_ / (v * v * v);
  }

  void build_ellipse_table() {
    const int m = 1 << 16;
    arclen_table_.assign(m + 1, 0.0);
    double dphi = 2.0 * pi() / m;
    double prev = ellipse_speed(0.0);
    for (int i = 1; i <= m; ++i) {
      double cur = ellipse_speed(dphi * i);
      arclen_table_[i] = arclen_table_[i - 1] + 0.5 * (prev + cur) * dphi;
      prev = cur;
    }
    perimeter_ = arclen_table_[m];
    kappa_max_ = axis_a_ / (axis_b_ * axis_b_);
    kappa_min_ = axis_b_ / (axis_a_ * axis_a_);
    argmax_ = 0.0;
  }

  double phi_of_s(double s) const {
    double L = perimeter_;
    s -= L * std::floor(s / L);
    auto it = std::upper_bound(arclen_table_.begin(), arclen_table_.end(), s);
    int i = static_cast<int>(std::max<std::ptrdiff_t>(1, it - arclen_table_.begin())) - 1;
    i = std::min(i, static_cast<int>(arclen_table_.size()) - 2);
    double seg = arclen_table_[i + 1] - arclen_table_[i];
    double frac = seg > 0.0 ? (s - arclen_table_[i]) / seg : 0.0;
    double dphi = 2.0 * pi() / (static_cast<double>(arclen_table_.size()) - 1.0);
    return dphi * (i + frac);
  }

  double sample_interp(double s) const {
    double L = perimeter_;
    s -= L * std::floor(s / L);
    double x = s / L * static_cast<double>(kappa_samples_.size());
    int i = static_cast<int>(std::floor(x));
    double frac = x - i;
    int n = static_cast<int>(kappa_samples_.size());
    i %= n;
    return kappa_samples_[i] * (1.0 - frac) + kappa_samples_[(i + 1) % n] * frac;
  }

  void reconstruct_from_samples() {
    // Integrate the heading theta' = kappa on a refined grid; the total turn
    // must be 2pi and the endpoint must land back at the start.
    int n = static_cast<int>(kappa_samples_.size());
    int refine = std::max(1, (1 << 14) / n);
    int m = n * refine;
    double ds = perimeter_ / m;
    double theta = 0.0, x = 0.0, y = 0.0, area2 = 0.0;
    kappa_max_ = kappa_samples_[0];
    kappa_min_ = kappa_samples_[0];
    argmax_ = 0.0;
    for (int i = 0; i < m; ++i) {
      double s_mid = (i + 0.5) * ds;
      double k_mid = sample_interp(s_mid);
      double k_node = sample_interp(i * ds);
      if (k_node > kappa_max_) {
        kappa_max_ = k_node;
        argmax_ = i * ds;
      }
      kappa_min_ = std::min(kappa_min_, k_node);
      double theta_mid = theta + 0.5 * ds * k_mid;
      double xn = x + ds * std::cos(theta_mid);
      double yn = y + ds * std::sin(theta_mid);
      area2 += x * yn - xn * y;
      x = xn;
      y = yn;
      theta += ds * k_mid;
    }
    double gap = std::hypot(x, y);
    if (gap > 1e-3 * perimeter_)
      throw std::invalid_argument("sampled: curvature profile does not close (gap " +
                                  std::to_string(gap) + ")");
    if (std::abs(theta - 2.0 * pi()) > 1e-3)
      throw std::invalid_argument("sampled: total turning is not 2pi");
    area_ = 0.5 * std::abs(area2);
  }
};

// Default strip depth: half the minimal radius of curvature, so the tubular
// coordinates stay non-degenerate with margin (t * kappa <= 1/2).
inline double default_strip_depth(const DomainGeometry& g) {
  double k = std::max(std::abs(g.max_curvature()), std::abs(g.min_curvature()));
  if (!(k > 0.0)) throw std::invalid_argument("default_strip_depth: flat boundary");
  return 0.5 / k;
}

// Uniform tensor grid on the periodic strip [0, L) x [0, t_cut]. Value nodes
// are (s_i, t_j), i = 0..n_s-1, j = 0..n_t-1 with t_0 = 0 on the boundary;
// the row t = t_cut is the Dirichlet truncation and carries no unknowns.
struct StripGrid {
  int n_s = 0;
  int n_t = 0;
  double ds = 0.0;
  double dt = 0.0;
  double length = 0.0;
  double t_cut = 0.0;

  static StripGrid make(const DomainGeometry& g, double t_cut, int n_s, int n_t) {
    if (n_s < 8 || n_t < 4) throw std::invalid_argument("StripGrid: grid too small");
    if (!(t_cut > 0.0)) throw std::invalid_argument("StripGrid: t_cut <= 0");
    double kmax = std::max(std::abs(g.max_curvature()), std::abs(g.min_curvature()));
    if (t_cut * kmax >= 1.0)
      throw std::invalid_argument("StripGrid: t_cut * max|kappa| >= 1, coordinates degenerate");
    StripGrid sg;
    sg.n_s = n_s;
    sg.n_t = n_t;
    sg.length = g.perimeter();
    sg.t_cut = t_cut;
    sg.ds = sg.length / n_s;
    sg.dt = t_cut / n_t;
    return sg;
  }

  int unknowns() const { return n_s * n_t; }
  int index(int i, int j) const { return i * n_t + j; }
  double s_node(int i) const { return ds * i; }
  double t_node(int j) const { return dt * j; }
  void validate() const {
    if (n_s < 8 || n_t < 4 || !(ds > 0.0) || !(dt > 0.0))
      throw std::invalid_argument("StripGrid: invalid");
  }
};

// Strip gauge: vanishes on the boundary t = 0 by construction.
inline double strip_gauge(const DomainGeometry& g, double s, double t) {
  return -t * (1.0 - 0.5 * t * g.curvature(s));
}

// Seam twist carrying the total flux: zeta * Area / h reduced mod 2pi.
inline double flux_twist(const DomainGeometry& g, double zeta, double h) {
  double raw = zeta * g.area() / h;
  double tp = 2.0 * DomainGeometry::pi();
  double k = std::floor(raw / tp);
  return raw - tp * k;
}

}  // namespace magrobin
