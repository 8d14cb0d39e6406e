#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace prognosis {

// Daubechies-3 orthonormal scaling filter (6 taps), normalized so the taps
// sum to sqrt(2). The wavelet filter is the quadrature mirror
// g[j] = (-1)^j * h[5-j].
inline constexpr std::array<double, 6> kDb3Lowpass = {
    0.33267055295008263,  0.8068915093110925,   0.45987750211849154,
    -0.13501102001025458, -0.08544127388202666, 0.03522629188570953,
};

inline constexpr std::array<double, 6> db3_highpass() {
    std::array<double, 6> g{};
    for (int j = 0; j < 6; ++j) g[j] = (j % 2 == 0 ? 1.0 : -1.0) * kDb3Lowpass[5 - j];
    return g;
}

struct WaveletDecomposition {
    std::vector<std::vector<double>> details;  // details[l] = level l+1 coefficients
    std::vector<double> approximation;         // final-level approximation
};

// Periodic pyramid decomposition with stride-2 downsampling. Returns
// nullopt when the series is too short (or odd-length) for the requested
// depth; each level needs an even input of at least 6 samples.
std::optional<WaveletDecomposition> dwt_db3(std::span<const double> series, int levels);

enum class WaveletStat { mean, mean_abs };

// Statistic of the detail coefficients at the given 1-based level.
std::optional<double> wavelet_feature(std::span<const double> series, int level, WaveletStat stat);

}  // namespace prognosis
