#include "levelk/filters.hpp"

#include <Eigen/Dense>
#include <string>

#include "levelk/error.hpp"

namespace levelk {

std::vector<double> finite_difference_velocity(std::span<const double> x, double dt) {
  if (x.size() < 2) throw InvalidArgument("finite differences need at least two samples");
  if (!(dt > 0.0)) throw InvalidArgument("sample spacing must be positive");
  const std::size_t n = x.size();
  std::vector<double> v(n);
  v[0] = (x[1] - x[0]) / dt;
  v[n - 1] = (x[n - 1] - x[n - 2]) / dt;
  for (std::size_t i = 1; i + 1 < n; ++i) v[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
  return v;
}

std::vector<double> savitzky_golay_weights(int window, int polyorder, int position) {
  if (window < 1 || polyorder < 0 || polyorder >= window) {
    throw InvalidArgument("Savitzky-Golay needs window > polyorder >= 0");
  }
  if (position < 0 || position >= window) throw InvalidArgument("evaluation position outside window");
  const int half = window / 2;
  const double scale = half > 0 ? static_cast<double>(half) : 1.0;
  Eigen::MatrixXd vander(window, polyorder + 1);
  for (int i = 0; i < window; ++i) {
    const double z = (i - half) / scale;
    double power = 1.0;
    for (int j = 0; j <= polyorder; ++j) {
      vander(i, j) = power;
      power *= z;
    }
  }
  const Eigen::MatrixXd pinv = vander.completeOrthogonalDecomposition().pseudoInverse();
  Eigen::RowVectorXd at(polyorder + 1);
  const double z0 = (position - half) / scale;
  double power = 1.0;
  for (int j = 0; j <= polyorder; ++j) {
    at(j) = power;
    power *= z0;
  }
  const Eigen::RowVectorXd w = at * pinv;
  return std::vector<double>(w.data(), w.data() + w.size());
}

std::vector<double> savitzky_golay(std::span<const double> series, int window, int polyorder) {
  if (window % 2 == 0) throw InvalidArgument("Savitzky-Golay window must be odd");
  if (polyorder < 0 || polyorder >= window) {
    throw InvalidArgument("Savitzky-Golay needs window > polyorder >= 0");
  }
  if (series.size() < static_cast<std::size_t>(window)) {
    throw InvalidArgument("series of " + std::to_string(series.size()) +
                          " samples is shorter than the window of " + std::to_string(window));
  }
  const int n = static_cast<int>(series.size());
  const int half = window / 2;
  std::vector<double> out(series.size());

  auto apply = [&](const std::vector<double>& w, int first) {
    double acc = 0.0;
    for (int j = 0; j < window; ++j) acc += w[j] * series[first + j];
    return acc;
  };

  const std::vector<double> center = savitzky_golay_weights(window, polyorder, half);
  for (int i = half; i < n - half; ++i) out[i] = apply(center, i - half);
  for (int i = 0; i < half; ++i) {
    out[i] = apply(savitzky_golay_weights(window, polyorder, i), 0);
    const int tail = n - half + i;
    out[tail] = apply(savitzky_golay_weights(window, polyorder, half + 1 + i), n - window);
  }
  return out;
}

}  // namespace levelk
