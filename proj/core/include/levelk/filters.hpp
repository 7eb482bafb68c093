#pragma once

#include <span>
#include <vector>

namespace levelk {

/// Central differences inside, one-sided at both ends. Needs >= 2 samples.
std::vector<double> finite_difference_velocity(std::span<const double> positions, double dt);

/// Least-squares weights that evaluate a degree-`polyorder` fit over `window`
/// samples at sample `position` (0-based within the window).
std::vector<double> savitzky_golay_weights(int window, int polyorder, int position);

/// Savitzky-Golay smoothing with a symmetric odd window. The first and last
/// half-windows are evaluated from the polynomial fitted to the first and last
/// full windows. Throws InvalidArgument unless window is odd, window >
/// polyorder >= 0 and the series has at least `window` samples.
std::vector<double> savitzky_golay(std::span<const double> series, int window, int polyorder);

}  // namespace levelk
