#pragma once

// Age-structured population with delayed modulation,
//   ∂_t g = −∂_s g − μ(s) g + ν(s) g(t − 1), g(t, 0) = ∫ β(s) g(t, s) ds,
// discretized by first-order upwinding on a truncated age interval.

#include <iosfwd>
#include <string>
#include <vector>

#include "delayadm/io.hpp"
#include "delayadm/semigroup.hpp"

namespace delayadm {

/// Coefficient profile on the age axis.
struct Profile {
  enum class Kind { constant, gaussian, step, bump, tabulated };

  Kind kind = Kind::constant;
  double value = 0.0;  // constant level, step height, gaussian/bump amplitude
  double center = 0.0;
  double width = 1.0;
  double from = 0.0;
  double to = 0.0;
  std::vector<double> table_s;
  std::vector<double> table_v;

  static Profile constant(double v);
  double operator()(double s) const;
};

/// A number is a constant profile; objects carry "kind" plus parameters:
/// gaussian {amplitude, center, width}, step {value, from, to},
/// bump {amplitude, from, to} (smooth, compactly supported),
/// tabulated {s: [...], values: [...]} (linear, held constant outside).
Profile profile_from_json(const Json& j, const char* what);
Json profile_to_json(const Profile& p);

struct PopulationConfig {
  Profile mu = Profile::constant(1.0);
  Profile nu = Profile::constant(0.0);
  Profile beta = Profile::constant(0.0);
  /// Age profile of the initial history, held constant over the window.
  Profile initial = Profile::constant(0.0);
  /// 0 selects 5 / min μ, capped at 50.
  double s_max = 0.0;
  int n = 400;
  /// Control injects uniformly on this age band; an empty band gives B = 0.
  double band_from = 1.0;
  double band_to = 2.0;

  void validate() const;
  double resolved_s_max() const;
};

struct PopulationModel {
  DelaySystem system;
  double ds = 0.0;
  /// Ages s_0 = 0, ..., s_n = s_max; unknowns live at s_1..s_n.
  std::vector<double> ages;
  /// β at s_0..s_n.
  std::vector<double> beta;
  bool nu_nonnegative = true;

  /// Boundary value g_0 = trapezoid ∫ β g recovered from the unknowns.
  cplx boundary_value(const CVector& g) const;
  /// ∫ β g by the trapezoid rule including g_0.
  cplx birth_integral(const CVector& g) const;
  /// Trapezoid ∫ g ds including g_0.
  cplx total(const CVector& g) const;
};

/// Throws ConfigError when dt exceeds the age step (CFL) or the birth row
/// cannot be eliminated (Δs·β(0)/2 ≥ 1).
PopulationModel build_population_system(const PopulationConfig& cfg, const GridSpec& grid);

/// Lifted initial state with the constant-in-time history of cfg.initial.
LiftedState population_initial_state(const PopulationConfig& cfg, const PopulationModel& model,
                                     int m);

struct PopulationRun {
  Trajectory trajectory;
  std::vector<double> times;
  std::vector<double> total;
  /// |g_1 − ∫ β g| per step (first computed node against the birth law).
  std::vector<double> boundary_residual;
  std::vector<double> min_value;
  double min_overall = 0.0;
  double max_boundary_residual = 0.0;
};

/// Zero input; samples t = 0, dt, ..., T_end.
PopulationRun run_population_demo(const PopulationConfig& cfg, const GridSpec& grid, double t_end);

Json population_summary_json(const PopulationConfig& cfg, const PopulationModel& model,
                             const GridSpec& grid, const PopulationRun& run);
/// Columns t, total, boundary_residual, min_value.
void write_population_series_csv(std::ostream& os, const PopulationRun& run);

}  // namespace delayadm
