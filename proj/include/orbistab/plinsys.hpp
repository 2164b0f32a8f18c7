#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "orbistab/spline.hpp"
#include "orbistab/types.hpp"

namespace orbistab {

/// Grid-sampled linear-periodic system with periodic cubic interpolation.
///
/// Holds A(s), B(s), the parameter speed rho(s), and optionally a constraint
/// row block (algebraic restriction of the admissible state) and the
/// projection matrix Omega(s) used by gain closures.
class PeriodicLinearSystem {
 public:
  PeriodicLinearSystem() = default;
  PeriodicLinearSystem(Vec s_grid, std::vector<Mat> A_samples,
                       std::vector<Mat> B_samples, Vec rho_samples,
                       double period,
                       std::vector<Mat> constraint_rows = {},
                       std::vector<Mat> omega_samples = {});

  Mat A(double s) const;
  Mat B(double s) const;
  Mat constraint(double s) const;
  Mat omega(double s) const;
  double rho(double s) const;

  int state_dim() const { return k_; }
  int input_dim() const { return m_; }
  bool has_constraint() const { return c_ > 0; }
  bool has_omega() const { return has_omega_; }
  double period() const { return period_; }
  double s_start() const { return s_grid_[0]; }
  const Vec& s_grid() const { return s_grid_; }
  const std::vector<Mat>& A_samples() const { return A_samples_; }
  const std::vector<Mat>& B_samples() const { return B_samples_; }
  const std::vector<Mat>& constraint_samples() const { return C_samples_; }
  const Vec& rho_samples() const { return rho_samples_; }

  /// Time duration of one parameter lap: integral of ds / rho(s).
  double time_period() const;

  nlohmann::json to_json() const;
  static PeriodicLinearSystem from_json(const nlohmann::json& j);

 private:
  void build_interpolants();
  int k_ = 0, m_ = 0, c_ = 0;
  bool has_omega_ = false;
  double period_ = 0.0;
  Vec s_grid_;
  std::vector<Mat> A_samples_, B_samples_, C_samples_, omega_samples_;
  Vec rho_samples_;
  PeriodicSplineSet A_sp_, B_sp_, C_sp_, omega_sp_, rho_sp_;
};

/// Periodic feedback gain schedule K(s), (m x k), periodic cubic interpolation.
class GainSchedule {
 public:
  GainSchedule() = default;
  GainSchedule(Vec s_grid, std::vector<Mat> K_samples, double period);

  Mat K(double s) const;
  int rows() const { return m_; }
  int cols() const { return k_; }
  double period() const { return period_; }
  const Vec& s_grid() const { return s_grid_; }
  const std::vector<Mat>& K_samples() const { return K_samples_; }

  /// CSV export: header s,K[i][j]..., one row per grid point.
  std::string to_csv() const;

 private:
  int m_ = 0, k_ = 0;
  double period_ = 0.0;
  Vec s_grid_;
  std::vector<Mat> K_samples_;
  PeriodicSplineSet sp_;
};

}  // namespace orbistab
