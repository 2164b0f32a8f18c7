#include "orbistab/spline.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "orbistab/errors.hpp"

namespace orbistab {

namespace {

// Tridiagonal solve (Thomas), multiple right-hand sides as columns.
Mat thomas_solve(const Vec& sub, const Vec& diag, const Vec& sup, Mat rhs) {
  const int n = static_cast<int>(diag.size());
  Vec cp(n);
  cp[0] = sup[0] / diag[0];
  rhs.row(0) /= diag[0];
  for (int i = 1; i < n; ++i) {
    const double m = diag[i] - sub[i] * cp[i - 1];
    if (i < n - 1) cp[i] = sup[i] / m;
    rhs.row(i) = (rhs.row(i) - sub[i] * rhs.row(i - 1)) / m;
  }
  for (int i = n - 2; i >= 0; --i) rhs.row(i) -= cp[i] * rhs.row(i + 1);
  return rhs;
}

}  // namespace

PeriodicSplineSet::PeriodicSplineSet(Vec s_grid, Mat values)
    : s_grid_(std::move(s_grid)), values_(std::move(values)) {
  const int np1 = static_cast<int>(s_grid_.size());
  if (np1 < 4 || values_.rows() != np1)
    throw std::invalid_argument("PeriodicSplineSet: need >= 4 closing knots");
  const int N = np1 - 1;
  const int M = static_cast<int>(values_.cols());
  if ((values_.row(N) - values_.row(0)).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("PeriodicSplineSet: samples not periodic");
  values_.row(N) = values_.row(0);

  auto h = [&](int i) {  // interval widths, i in 0..N-1
    return s_grid_[i + 1] - s_grid_[i];
  };

  // Cyclic tridiagonal system for the knot second derivatives.
  Vec sub(N), diag(N), sup(N);
  Mat rhs(N, M);
  for (int i = 0; i < N; ++i) {
    const double hm = h((i + N - 1) % N);
    const double hi = h(i);
    sub[i] = hm / 6.0;
    diag[i] = (hm + hi) / 3.0;
    sup[i] = hi / 6.0;
    rhs.row(i) = (values_.row(i + 1) - values_.row(i)) / hi -
                 (values_.row(i) - values_.row((i + N - 1) % N)) / hm;
  }

  // Sherman-Morrison removal of the cyclic corners.
  const double corner_top = sub[0];     // A(0, N-1)
  const double corner_bot = sup[N - 1]; // A(N-1, 0)
  const double gamma = -diag[0];
  Vec diag_mod = diag;
  diag_mod[0] -= gamma;
  diag_mod[N - 1] -= corner_top * corner_bot / gamma;

  Mat z = thomas_solve(sub, diag_mod, sup, rhs);
  Mat u = Mat::Zero(N, 1);
  u(0, 0) = gamma;
  u(N - 1, 0) = corner_bot;
  Mat q = thomas_solve(sub, diag_mod, sup, u);

  // v = (1, 0, ..., 0, corner_top / gamma)
  RowVec vz = z.row(0) + (corner_top / gamma) * z.row(N - 1);
  const double vq = q(0, 0) + (corner_top / gamma) * q(N - 1, 0);

  second_.resize(np1, M);
  second_.topRows(N) = z - q * (vz / (1.0 + vq));
  second_.row(N) = second_.row(0);
}

int PeriodicSplineSet::locate(double& s) const {
  const int N = static_cast<int>(s_grid_.size()) - 1;
  s = wrap_parameter(s, s_grid_[0], s_grid_[N] - s_grid_[0]);
  const double* begin = s_grid_.data();
  int i = static_cast<int>(std::upper_bound(begin, begin + N + 1, s) - begin) - 1;
  return std::clamp(i, 0, N - 1);
}

RowVec PeriodicSplineSet::eval(double s) const {
  double sv = s;
  const int i = locate(sv);
  const double h = s_grid_[i + 1] - s_grid_[i];
  const double A = (s_grid_[i + 1] - sv) / h;
  const double B = (sv - s_grid_[i]) / h;
  return A * values_.row(i) + B * values_.row(i + 1) +
         ((A * A * A - A) * second_.row(i) + (B * B * B - B) * second_.row(i + 1)) *
             (h * h / 6.0);
}

RowVec PeriodicSplineSet::eval_derivative(double s) const {
  double sv = s;
  const int i = locate(sv);
  const double h = s_grid_[i + 1] - s_grid_[i];
  const double A = (s_grid_[i + 1] - sv) / h;
  const double B = (sv - s_grid_[i]) / h;
  return (values_.row(i + 1) - values_.row(i)) / h -
         (3.0 * A * A - 1.0) / 6.0 * h * second_.row(i) +
         (3.0 * B * B - 1.0) / 6.0 * h * second_.row(i + 1);
}

Vec spectral_derivative(const Vec& samples, double period) {
  const int N = static_cast<int>(samples.size());
  if (N < 4) throw std::invalid_argument("spectral_derivative: too few samples");
  std::vector<double> in(samples.data(), samples.data() + N);
  std::vector<std::complex<double>> freq(static_cast<size_t>(N / 2 + 1));
  fftw_plan fwd = fftw_plan_dft_r2c_1d(
      N, in.data(), reinterpret_cast<fftw_complex*>(freq.data()), FFTW_ESTIMATE);
  fftw_execute(fwd);
  fftw_destroy_plan(fwd);

  const double w0 = 2.0 * M_PI / period;
  for (int k = 0; k <= N / 2; ++k) {
    if (2 * k == N) {
      freq[static_cast<size_t>(k)] = 0.0;  // Nyquist bin of an odd operator
    } else {
      freq[static_cast<size_t>(k)] *= std::complex<double>(0.0, k * w0);
    }
  }
  std::vector<double> out(static_cast<size_t>(N));
  fftw_plan bwd = fftw_plan_dft_c2r_1d(
      N, reinterpret_cast<fftw_complex*>(freq.data()), out.data(), FFTW_ESTIMATE);
  fftw_execute(bwd);
  fftw_destroy_plan(bwd);

  Vec d(N);
  for (int i = 0; i < N; ++i) d[i] = out[static_cast<size_t>(i)] / N;
  return d;
}

double periodic_trapezoid(const Vec& s_grid, const Vec& samples) {
  const int np1 = static_cast<int>(s_grid.size());
  if (samples.size() != np1)
    throw std::invalid_argument("periodic_trapezoid: size mismatch");
  double acc = 0.0;
  for (int i = 0; i + 1 < np1; ++i)
    acc += 0.5 * (samples[i] + samples[i + 1]) * (s_grid[i + 1] - s_grid[i]);
  return acc;
}

}  // namespace orbistab
