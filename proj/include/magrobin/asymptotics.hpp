#pragma once

// Sweep orchestration and asymptotic analysis on top of the 1D/2D solvers:
// two-term predictions and remainder-exponent fits, the scaling bridges
// between the semiclassical eigenvalue lambda_1(h, zeta) and the fixed-domain
// quantities mu_1 / mu~_1, the diamagnetism gap study, and localization
// diagnostics of strip ground states.

#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "disk_solver.hpp"
#include "geometry.hpp"
#include "perturbation.hpp"
#include "strip_solver.hpp"

namespace magrobin {

namespace detail {

// Deterministic row-parallel map: each worker claims indices from an atomic
// counter; results land in caller-owned slots, so the output is independent
// of scheduling. First exception wins and is rethrown after join.
inline void parallel_rows(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int count = std::min(jobs, n);
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fits

struct FitResult {
  double exponent = 0.0;  // log-log slope
  double constant = 0.0;  // prefactor exp(intercept)
  bool floor_limited = false;
  int points = 0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_linear: need >= 2 points");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("fit_linear: degenerate abscissae");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

// Power-law fit |y| ~ C x^p; points with |y| <= floor are dropped (numerical
// noise floor) and flagged.
inline FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                            double floor = 0.0) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw std::invalid_argument("fit_loglog: nonpositive abscissa");
    if (std::abs(y[i]) <= floor) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  if (lx.size() < 2) throw SolveError("fit_loglog: fewer than 2 points above the floor",
                                      static_cast<double>(lx.size()));
  LinearFit f = fit_linear(lx, ly);
  FitResult out;
  out.exponent = f.slope;
  out.constant = std::exp(f.intercept);
  out.floor_limited = lx.size() < x.size();
  out.points = static_cast<int>(lx.size());
  return out;
}

// ---------------------------------------------------------------------------
// Two-term prediction

// b_eps(zeta): series infimum below the critical coupling, zeta^2/4 at it,
// zero above it.
inline double b_eps_value(double epsilon, double zeta, const PerturbationTable* table,
                          double a0 = 2.7) {
  if (!(epsilon > 0.0) || !(epsilon <= 0.5))
    throw std::invalid_argument("b_eps_value: requires 0 < epsilon <= 1/2");
  if (epsilon < 0.25) {
    if (!table) throw std::invalid_argument("b_eps_value: table required for epsilon < 1/4");
    int n = smallest_n_for_eps(epsilon);
    if (n > table->order) throw std::invalid_argument("b_eps_value: table order too low");
    return e_n(*table, zeta, a0, n).value;
  }
  if (epsilon == 0.25) return 0.25 * zeta * zeta;
  return 0.0;
}

// lambda_1(h, zeta) ~ -h + b_eps(zeta) h - kappa_max h^{3/2}.
inline double predicted_lambda1(double h, double epsilon, double zeta, double kappa_max,
                                const PerturbationTable* table, double a0 = 2.7) {
  double b = (zeta > 0.0) ? b_eps_value(epsilon, zeta, table, a0) : 0.0;
  return -h + b * h - kappa_max * std::pow(h, 1.5);
}

// ---------------------------------------------------------------------------
// Sweeps

enum class Solver2D { disk, strip };

struct SweepConfig {
  std::vector<double> hs;
  double epsilon = 0.5;
  double coupling_c = 1.0;  // zeta = coupling_c * h^epsilon
  Solver2D solver = Solver2D::disk;
  DomainGeometry geometry = DomainGeometry::disk(1.0);
  DiskOptions disk;
  StripOptions strip;
  bool keep_ground = false;  // retain strip ground states in the rows
  int jobs = 1;
  const PerturbationTable* table = nullptr;  // required when epsilon < 1/4
  double a0 = 2.7;
};

struct SweepRow {
  double h = 0.0;
  double zeta = 0.0;
  double lambda1 = 0.0;         // extrapolated when Richardson ran
  double lambda1_coarse = 0.0;  // value on the assembly grid itself
  double residual = 0.0;
  double truncation_mass = 0.0;
  double predicted = 0.0;
  double remainder = 0.0;       // lambda1 - predicted
  StripGrid grid;               // strip solver rows only
  Eigen::VectorXcd ground;      // keep_ground strip rows only
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double epsilon = 0.5;
  double kappa_max = 0.0;
  std::string solver;
};

inline SweepResult sweep_lambda1(const SweepConfig& cfg) {
  SweepResult out;
  out.epsilon = cfg.epsilon;
  out.kappa_max = cfg.geometry.max_curvature();
  out.solver = cfg.solver == Solver2D::disk ? "disk" : "strip";
  out.rows.resize(cfg.hs.size());
  if (cfg.hs.empty()) return out;

  detail::parallel_rows(static_cast<int>(cfg.hs.size()), cfg.jobs, [&](int i) {
    double h = cfg.hs[i];
    SweepRow row;
    row.h = h;
    row.zeta = cfg.coupling_c * std::pow(h, cfg.epsilon);
    if (cfg.solver == Solver2D::disk) {
      if (cfg.geometry.kind() != DomainGeometry::Kind::disk)
        throw std::invalid_argument("sweep_lambda1: disk solver needs disk geometry");
      DiskResult r = solve_disk(h, row.zeta, cfg.disk);
      row.lambda1 = r.lambda1;
      row.lambda1_coarse = r.lambda1_raw;
      row.residual = 0.0;
      row.truncation_mass = 0.0;
    } else {
      StripOptions so = cfg.strip;
      so.epsilon_hint = cfg.epsilon;
      StripGrid grid = suggest_strip_grid(cfg.geometry, h, row.zeta, so);
      StripResult coarse = solve_strip_on_grid(cfg.geometry, grid, h, row.zeta, so);
      row.lambda1_coarse = coarse.lambda1;
      row.residual = coarse.residual;
      row.truncation_mass = coarse.truncation_mass;
      row.grid = grid;
      if (cfg.keep_ground) row.ground = coarse.ground;
      StripOptions fo = so;
      fo.k = 1;
      fo.n_s = 2 * grid.n_s;
      fo.n_t = 2 * grid.n_t;
      fo.t_cut = grid.t_cut;
      StripGrid fine = StripGrid::make(cfg.geometry, grid.t_cut, fo.n_s, fo.n_t);
      StripResult fr = solve_strip_on_grid(cfg.geometry, fine, h, row.zeta, fo);
      row.lambda1 = (4.0 * fr.lambda1 - coarse.lambda1) / 3.0;
      row.residual = std::max(row.residual, fr.residual);
    }
    row.predicted =
        predicted_lambda1(h, cfg.epsilon, row.zeta, out.kappa_max, cfg.table, cfg.a0);
    row.remainder = row.lambda1 - row.predicted;
    out.rows[i] = std::move(row);
  });
  return out;
}

// Remainder-exponent fit of a sweep against its stored two-term prediction.
inline FitResult fit_two_term(const SweepResult& sr, double floor = 0.0) {
  std::vector<double> hs, rem;
  for (const auto& r : sr.rows) {
    hs.push_back(r.h);
    rem.push_back(r.remainder);
  }
  return fit_loglog(hs, rem, floor);
}

// ---------------------------------------------------------------------------
// Scaling bridges

// mu_1(h; b, alpha, gamma) = (gamma^4 / h^{2-4 alpha}) lambda_1(h', zeta'),
// h' = h^{2-2 alpha} / gamma^2, zeta' = b h^{1-2 alpha} / gamma^2. The
// identity is an exact rescaling of quadratic forms, so it holds for the
// discretized operators verbatim; lambda1_fn supplies the solver.
struct BridgeMap {
  double h_prime = 0.0;
  double zeta_prime = 0.0;
  double scale = 0.0;
};

inline BridgeMap bridge_map(double h, double b, double alpha, double gamma) {
  if (!(h > 0.0) || !(gamma < 0.0))
    throw std::invalid_argument("bridge_map: need h > 0 and gamma < 0");
  BridgeMap m;
  m.h_prime = std::pow(h, 2.0 - 2.0 * alpha) / (gamma * gamma);
  m.zeta_prime = b * std::pow(h, 1.0 - 2.0 * alpha) / (gamma * gamma);
  m.scale = std::pow(gamma, 4) / std::pow(h, 2.0 - 4.0 * alpha);
  return m;
}

template <class F>
inline double mu1_bridge(double h, double b, double alpha, double gamma, F&& lambda1_fn) {
  BridgeMap m = bridge_map(h, b, alpha, gamma);
  return m.scale * lambda1_fn(m.h_prime, m.zeta_prime);
}

// Two-term prediction transported through the bridge: the effective coupling
// exponent is read off from (h', zeta').
inline double predicted_mu1(double h, double b, double alpha, double gamma, double kappa_max,
                            const PerturbationTable* table, double a0 = 2.7) {
  BridgeMap m = bridge_map(h, b, alpha, gamma);
  double eps_eff = 0.5;
  if (m.zeta_prime > 0.0) {
    eps_eff = std::log(m.zeta_prime) / std::log(m.h_prime);
    if (!(eps_eff > 0.0) || !(eps_eff <= 0.5))
      throw std::invalid_argument("predicted_mu1: effective coupling exponent out of range");
  }
  return m.scale * predicted_lambda1(m.h_prime, eps_eff, m.zeta_prime, kappa_max, table, a0);
}

// Fixed-domain, fixed-field family: mu~_1(beta; H) = H^2 mu_1(1/H; 1, alpha,
// beta H^{alpha-1}); both field and zero-field members land on the same
// h' = beta^{-2}, so their difference is a same-operator comparison.
template <class F>
inline double mu_tilde(double beta, double bigH, double alpha, F&& lambda1_fn) {
  if (!(beta < 0.0) || !(bigH > 0.0))
    throw std::invalid_argument("mu_tilde: need beta < 0, H > 0");
  return bigH * bigH *
         mu1_bridge(1.0 / bigH, 1.0, alpha, beta * std::pow(bigH, alpha - 1.0), lambda1_fn);
}

struct DiamagResult {
  double gap = 0.0;       // Richardson-extrapolated
  double gap_raw = 0.0;   // same-grid values: inequality holds exactly here
  double mu_field = 0.0;
  double mu_zero = 0.0;
  double h_prime = 0.0;
  double zeta_prime = 0.0;
  double scale = 0.0;     // beta^4
};

// Diamagnetism gap mu~_1(beta; H) - mu~_1(beta; 0) >= 0. Computed as
// beta^4 [lambda_1(beta^{-2}, H beta^{-2}) - lambda_1(beta^{-2}, 0)] on a
// shared discretisation, where the inequality is exact by form domination.
inline DiamagResult diamag_gap(double beta, double bigH, double alpha,
                               const DomainGeometry& geom, const DiskOptions& opt = {},
                               const StripOptions& sopt = {}) {
  if (!(beta < 0.0) || !(bigH > 0.0))
    throw std::invalid_argument("diamag_gap: need beta < 0, H > 0");
  DiamagResult out;
  out.h_prime = 1.0 / (beta * beta);
  out.zeta_prime = bigH / (beta * beta);
  out.scale = std::pow(beta, 4);
  if (geom.kind() == DomainGeometry::Kind::disk) {
    DiskResult rf = solve_disk(out.h_prime, out.zeta_prime, opt);
    DiskResult rz = solve_disk(out.h_prime, 0.0, opt);
    out.mu_field = out.scale * rf.lambda1;
    out.mu_zero = out.scale * rz.lambda1;
    out.gap = out.mu_field - out.mu_zero;
    out.gap_raw = out.scale * (rf.lambda1_raw - rz.lambda1_raw);
  } else {
    StripOptions so = sopt;
    StripGrid grid = suggest_strip_grid(geom, out.h_prime, out.zeta_prime, so);
    double lf = solve_strip_on_grid(geom, grid, out.h_prime, out.zeta_prime, so).lambda1;
    double lz = solve_strip_on_grid(geom, grid, out.h_prime, 0.0, so).lambda1;
    out.mu_field = out.scale * lf;
    out.mu_zero = out.scale * lz;
    out.gap = out.mu_field - out.mu_zero;
    out.gap_raw = out.gap;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Localization diagnostics

struct LocalizationProfile {
  double t_star = 0.0;         // h^rho
  double interior_mass = 0.0;  // mass fraction at t >= t_star
  double cap_threshold = 0.0;  // h^{0.15}
  double cap_fraction = 0.0;   // mass fraction where kappa_max - kappa < threshold
  double agmon_025 = 0.0;      // Agmon-weighted norms exp(2 a t / sqrt(h))
  double agmon_050 = 0.0;
  double agmon_075 = 0.0;
};

namespace detail {

inline double strip_mass_sum(const DomainGeometry& geom, const StripGrid& grid,
                             const Eigen::VectorXcd& u,
                             const std::function<double(double s, double t)>& indicator) {
  double acc = 0.0;
  for (int i = 0; i < grid.n_s; ++i) {
    double s = grid.s_node(i);
    double kappa = geom.curvature(s);
    for (int j = 0; j < grid.n_t; ++j) {
      double t = grid.t_node(j);
      double w = grid.ds * (j == 0 ? 0.5 * grid.dt : grid.dt) * (1.0 - t * kappa);
      acc += indicator(s, t) * w * std::norm(u[grid.index(i, j)]);
    }
  }
  return acc;
}

}  // namespace detail

inline double agmon_norm(const DomainGeometry& geom, const StripGrid& grid,
                         const Eigen::VectorXcd& u, double h, double a) {
  double rh = std::sqrt(h);
  double num = detail::strip_mass_sum(geom, grid, u, [&](double, double t) {
    return std::exp(2.0 * a * t / rh);
  });
  double den = detail::strip_mass_sum(geom, grid, u, [](double, double) { return 1.0; });
  return num / den;
}

inline LocalizationProfile localization_profile(const StripResult& gs, const DomainGeometry& geom,
                                                double h, const RegimeExponents& regime,
                                                double eta_star = 0.15) {
  LocalizationProfile p;
  p.t_star = std::pow(h, regime.rho);
  p.cap_threshold = std::pow(h, eta_star);
  double total = detail::strip_mass_sum(geom, gs.grid, gs.ground,
                                        [](double, double) { return 1.0; });
  double interior = detail::strip_mass_sum(geom, gs.grid, gs.ground, [&](double, double t) {
    return t >= p.t_star ? 1.0 : 0.0;
  });
  double kmax = geom.max_curvature();
  double caps = detail::strip_mass_sum(geom, gs.grid, gs.ground, [&](double s, double) {
    return (kmax - geom.curvature(s)) < p.cap_threshold ? 1.0 : 0.0;
  });
  p.interior_mass = interior / total;
  p.cap_fraction = caps / total;
  p.agmon_025 = agmon_norm(geom, gs.grid, gs.ground, h, 0.25);
  p.agmon_050 = agmon_norm(geom, gs.grid, gs.ground, h, 0.5);
  p.agmon_075 = agmon_norm(geom, gs.grid, gs.ground, h, 0.75);
  return p;
}

}  // namespace magrobin
