#include "prognosis/wavelet.hpp"

#include <cmath>

namespace prognosis {

namespace {

// One periodic analysis step: x (even length n) -> approx/detail of n/2.
void analysis_step(const std::vector<double>& x, std::vector<double>& approx,
                   std::vector<double>& detail) {
    constexpr auto h = kDb3Lowpass;
    constexpr auto g = db3_highpass();
    const std::size_t n = x.size();
    const std::size_t half = n / 2;
    approx.assign(half, 0.0);
    detail.assign(half, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
        double a = 0.0, d = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            const double v = x[(2 * k + j) % n];
            a += h[j] * v;
            d += g[j] * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
}

}  // namespace

std::optional<WaveletDecomposition> dwt_db3(std::span<const double> series, int levels) {
    if (levels < 1) return std::nullopt;
    std::vector<double> current(series.begin(), series.end());
    WaveletDecomposition out;
    for (int l = 0; l < levels; ++l) {
        if (current.size() < 6 || current.size() % 2 != 0) return std::nullopt;
        std::vector<double> approx, detail;
        analysis_step(current, approx, detail);
        out.details.push_back(std::move(detail));
        current = std::move(approx);
    }
    out.approximation = std::move(current);
    return out;
}

std::optional<double> wavelet_feature(std::span<const double> series, int level, WaveletStat stat) {
    auto dec = dwt_db3(series, level);
    if (!dec) return std::nullopt;
    const auto& coeffs = dec->details[static_cast<std::size_t>(level) - 1];
    if (coeffs.empty()) return std::nullopt;
    double acc = 0.0;
    for (double c : coeffs) acc += stat == WaveletStat::mean ? c : std::abs(c);
    return acc / static_cast<double>(coeffs.size());
}

}  // namespace prognosis
