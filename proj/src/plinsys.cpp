#include "orbistab/plinsys.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <stdexcept>

#include "orbistab/errors.hpp"

namespace orbistab {

namespace {

// Flatten matrix samples into spline channels (row-major per sample).
Mat stack_samples(const std::vector<Mat>& samples) {
  const int np1 = static_cast<int>(samples.size());
  const int rows = static_cast<int>(samples[0].rows());
  const int cols = static_cast<int>(samples[0].cols());
  Mat out(np1, rows * cols);
  for (int i = 0; i < np1; ++i) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) out(i, r * cols + c) = samples[static_cast<size_t>(i)](r, c);
  }
  return out;
}

Mat unflatten(const RowVec& row, int rows, int cols) {
  Mat out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = row[r * cols + c];
  return out;
}

nlohmann::json samples_to_json(const std::vector<Mat>& samples) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Mat& M : samples) {
    nlohmann::json flat = nlohmann::json::array();
    for (int r = 0; r < M.rows(); ++r)
      for (int c = 0; c < M.cols(); ++c) flat.push_back(M(r, c));
    arr.push_back(std::move(flat));
  }
  return arr;
}

std::vector<Mat> samples_from_json(const nlohmann::json& arr, int rows,
                                   int cols) {
  std::vector<Mat> out;
  for (const auto& flat : arr) {
    Mat M(rows, cols);
    int idx = 0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) M(r, c) = flat.at(static_cast<size_t>(idx++)).get<double>();
    out.push_back(std::move(M));
  }
  return out;
}

}  // namespace

PeriodicLinearSystem::PeriodicLinearSystem(Vec s_grid, std::vector<Mat> A_samples,
                                           std::vector<Mat> B_samples,
                                           Vec rho_samples, double period,
                                           std::vector<Mat> constraint_rows,
                                           std::vector<Mat> omega_samples)
    : period_(period),
      s_grid_(std::move(s_grid)),
      A_samples_(std::move(A_samples)),
      B_samples_(std::move(B_samples)),
      C_samples_(std::move(constraint_rows)),
      omega_samples_(std::move(omega_samples)),
      rho_samples_(std::move(rho_samples)) {
  if (A_samples_.empty() || A_samples_.size() != static_cast<size_t>(s_grid_.size()))
    throw std::invalid_argument("PeriodicLinearSystem: sample/grid mismatch");
  k_ = static_cast<int>(A_samples_[0].rows());
  m_ = static_cast<int>(B_samples_[0].cols());
  c_ = C_samples_.empty() ? 0 : static_cast<int>(C_samples_[0].rows());
  has_omega_ = !omega_samples_.empty();
  const size_t last = A_samples_.size() - 1;
  if ((A_samples_[last] - A_samples_[0]).cwiseAbs().maxCoeff() > 1e-9 ||
      (B_samples_[last] - B_samples_[0]).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("PeriodicLinearSystem: samples not periodic");
  build_interpolants();
}

void PeriodicLinearSystem::build_interpolants() {
  A_sp_ = PeriodicSplineSet(s_grid_, stack_samples(A_samples_));
  B_sp_ = PeriodicSplineSet(s_grid_, stack_samples(B_samples_));
  if (c_ > 0) C_sp_ = PeriodicSplineSet(s_grid_, stack_samples(C_samples_));
  if (has_omega_) omega_sp_ = PeriodicSplineSet(s_grid_, stack_samples(omega_samples_));
  rho_sp_ = PeriodicSplineSet(s_grid_, Mat(rho_samples_));
}

Mat PeriodicLinearSystem::A(double s) const { return unflatten(A_sp_.eval(s), k_, k_); }
Mat PeriodicLinearSystem::B(double s) const { return unflatten(B_sp_.eval(s), k_, m_); }

Mat PeriodicLinearSystem::constraint(double s) const {
  if (c_ == 0) throw std::logic_error("system has no constraint rows");
  return unflatten(C_sp_.eval(s), c_, k_);
}

Mat PeriodicLinearSystem::omega(double s) const {
  if (!has_omega_) throw std::logic_error("system carries no Omega samples");
  const int n = static_cast<int>(omega_samples_[0].rows());
  return unflatten(omega_sp_.eval(s), n, static_cast<int>(omega_samples_[0].cols()));
}

double PeriodicLinearSystem::rho(double s) const { return rho_sp_.eval(s)[0]; }

double PeriodicLinearSystem::time_period() const {
  Vec integrand = rho_samples_.cwiseInverse();
  return periodic_trapezoid(s_grid_, integrand);
}

nlohmann::json PeriodicLinearSystem::to_json() const {
  nlohmann::json j;
  j["period"] = period_;
  j["state_dim"] = k_;
  j["input_dim"] = m_;
  j["s_grid"] = std::vector<double>(s_grid_.data(), s_grid_.data() + s_grid_.size());
  j["A"] = samples_to_json(A_samples_);
  j["B"] = samples_to_json(B_samples_);
  j["rho"] = std::vector<double>(rho_samples_.data(),
                                 rho_samples_.data() + rho_samples_.size());
  if (c_ > 0) {
    j["constraint"] = samples_to_json(C_samples_);
    j["constraint_rows"] = c_;
  }
  if (has_omega_) j["omega"] = samples_to_json(omega_samples_);
  return j;
}

PeriodicLinearSystem PeriodicLinearSystem::from_json(const nlohmann::json& j) {
  const int k = j.at("state_dim").get<int>();
  const int m = j.at("input_dim").get<int>();
  std::vector<double> grid = j.at("s_grid").get<std::vector<double>>();
  Vec s_grid = Eigen::Map<Vec>(grid.data(), static_cast<long>(grid.size()));
  std::vector<double> rho = j.at("rho").get<std::vector<double>>();
  Vec rho_v = Eigen::Map<Vec>(rho.data(), static_cast<long>(rho.size()));
  std::vector<Mat> C, Om;
  if (j.contains("constraint"))
    C = samples_from_json(j.at("constraint"), j.at("constraint_rows").get<int>(), k);
  if (j.contains("omega")) Om = samples_from_json(j.at("omega"), k, k);
  return PeriodicLinearSystem(std::move(s_grid), samples_from_json(j.at("A"), k, k),
                              samples_from_json(j.at("B"), k, m), std::move(rho_v),
                              j.at("period").get<double>(), std::move(C),
                              std::move(Om));
}

GainSchedule::GainSchedule(Vec s_grid, std::vector<Mat> K_samples, double period)
    : period_(period), s_grid_(std::move(s_grid)), K_samples_(std::move(K_samples)) {
  if (K_samples_.empty() || K_samples_.size() != static_cast<size_t>(s_grid_.size()))
    throw std::invalid_argument("GainSchedule: sample/grid mismatch");
  m_ = static_cast<int>(K_samples_[0].rows());
  k_ = static_cast<int>(K_samples_[0].cols());
  const size_t last = K_samples_.size() - 1;
  if ((K_samples_[last] - K_samples_[0]).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("GainSchedule: samples not periodic");
  for (const Mat& K : K_samples_)
    if (!K.allFinite()) throw std::invalid_argument("GainSchedule: non-finite gain");
  sp_ = PeriodicSplineSet(s_grid_, stack_samples(K_samples_));
}

Mat GainSchedule::K(double s) const { return unflatten(sp_.eval(s), m_, k_); }

std::string GainSchedule::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "s";
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < k_; ++j) os << ",K[" << i << "][" << j << "]";
  os << "\n";
  for (long idx = 0; idx < s_grid_.size(); ++idx) {
    os << s_grid_[idx];
    const Mat& K = K_samples_[static_cast<size_t>(idx)];
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < k_; ++j) os << "," << K(i, j);
    os << "\n";
  }
  return os.str();
}

}  // namespace orbistab
