#pragma once

// Frequency response -> pulse train, and arrival extraction.
//
// The one-sided spectrum on m * dw (m < M) is mirrored into a Hermitian
// spectrum of length 2M and inverted, giving a real series on t_n = n * dt
// with period T = 2 pi / dw and dt = T / (2M). Scaling by 1/dt makes a flat
// unit spectrum integrate to one.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "hyperlattice/error.hpp"
#include "hyperlattice/fdsolver.hpp"

namespace hyperlattice {

enum class Window { rectangular, raised_cosine };

inline const char* to_string(Window w) { return w == Window::rectangular ? "rectangular" : "raised_cosine"; }

struct SweepConfig {
    double delta_omega = 2.0 * std::numbers::pi / 10.0;
    std::size_t bins = 4096;
    Window window = Window::raised_cosine;

    double period() const { return 2.0 * std::numbers::pi / delta_omega; }
    double dt() const { return period() / (2.0 * static_cast<double>(bins)); }
    FrequencyGrid grid() const { return {delta_omega, bins}; }

    /// Weight of bin m. The raised cosine is a Hann taper over the whole
    /// positive band: zero at DC and at the band edge.
    double weight(std::size_t m) const {
        if (window == Window::rectangular) return 1.0;
        const double x = static_cast<double>(m) / static_cast<double>(bins);
        return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * x));
    }

    friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct TimeResponse {
    double dt = 0.0;
    std::vector<double> values;
    /// Height at t = 0 of the windowed response to a lossless unit impulse;
    /// arrival amplitudes are expressed in these units.
    double unit_peak = 1.0;
    /// Largest |imaginary part| left by the inverse transform.
    double imag_residue = 0.0;

    double t(std::size_t n) const { return static_cast<double>(n) * dt; }
    double period() const { return dt * static_cast<double>(values.size()); }
};

struct Arrival {
    double time = 0.0;
    double amplitude = 0.0; ///< signed, in units of a lossless unit pulse
    double prominence = 0.0;
};

inline double unit_pulse_peak(const SweepConfig& config) {
    double sum = config.weight(0);
    for (std::size_t m = 1; m < config.bins; ++m) sum += 2.0 * config.weight(m);
    return sum / config.period();
}

inline TimeResponse to_time(const FrequencyResponse& response, const SweepConfig& config) {
    if (response.grid.delta_omega != config.delta_omega || response.grid.count != config.bins ||
        response.values.size() != config.bins)
        throw UsageError("to_time: frequency grid does not match the sweep configuration");
    if (config.bins < 2) throw UsageError("to_time: at least 2 bins are required");

    const std::size_t m_bins = config.bins;
    const std::size_t n = 2 * m_bins;
    std::vector<complex> spectrum(n, complex{});
    for (std::size_t m = 0; m < m_bins; ++m) spectrum[m] = config.weight(m) * response.values[m];
    spectrum[0] = spectrum[0].real();
    for (std::size_t m = 1; m < m_bins; ++m) spectrum[n - m] = std::conj(spectrum[m]);

    Eigen::FFT<double> fft;
    std::vector<complex> series;
    fft.inv(series, spectrum);

    TimeResponse out;
    out.dt = config.dt();
    out.unit_peak = unit_pulse_peak(config);
    out.values.resize(n);
    double re_max = 0.0, im_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = series[i].real() / out.dt;
        re_max = std::max(re_max, std::abs(series[i].real()));
        im_max = std::max(im_max, std::abs(series[i].imag()));
    }
    out.imag_residue = re_max > 0.0 ? im_max / re_max : im_max;
    return out;
}

/// Analytic signal: negative-frequency bins zeroed, positive ones doubled.
inline std::vector<complex> analytic_signal(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    Eigen::FFT<double> fft;
    std::vector<complex> spec;
    std::vector<double> in = x;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    fft.fwd(spec, in); // bins 0 .. n/2
    std::vector<complex> full(n, complex{});
    for (std::size_t k = 0; k < spec.size() && k < n; ++k) {
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        full[k] = edge ? spec[k] : 2.0 * spec[k];
    }
    Eigen::FFT<double> inv;
    std::vector<complex> out;
    inv.inv(out, full);
    return out;
}

inline std::vector<double> envelope(const TimeResponse& tr) {
    const auto z = analytic_signal(tr.values);
    std::vector<double> env(z.size());
    std::transform(z.begin(), z.end(), env.begin(), [](const complex& v) { return std::abs(v); });
    return env;
}

/// Envelope peaks above relative_threshold * (global envelope maximum),
/// refined by a parabola through the three samples around each maximum.
/// The amplitude is the refined envelope height carrying the sign of the
/// response at the nearest sample, divided by TimeResponse::unit_peak.
inline std::vector<Arrival> find_arrivals(const TimeResponse& tr, double relative_threshold) {
    if (!(relative_threshold > 0.0 && relative_threshold < 1.0))
        throw DomainError("find_arrivals: relative_threshold must lie in (0, 1)");
    const auto env = envelope(tr);
    const std::size_t n = env.size();
    std::vector<Arrival> out;
    if (n < 3) return out;
    const double global = *std::max_element(env.begin(), env.end());
    if (!(global > 0.0)) return out;
    const double floor = relative_threshold * global;

    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double y0 = env[i - 1], y1 = env[i], y2 = env[i + 1];
        if (!(y1 > y0 && y1 >= y2 && y1 > floor)) continue;

        const double denom = y0 - 2.0 * y1 + y2;
        double delta = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
        delta = std::clamp(delta, -0.5, 0.5);
        const double height = y1 - 0.25 * (y0 - y2) * delta;
        // |delta| <= 1/2, so sample i is the nearest one.
        const double sign = tr.values[i] < 0.0 ? -1.0 : 1.0;

        // Topographic prominence: drop to the higher of the two saddles.
        double left_min = y1, right_min = y1;
        for (std::size_t j = i; j-- > 0;) {
            if (env[j] > y1) break;
            left_min = std::min(left_min, env[j]);
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (env[j] > y1) break;
            right_min = std::min(right_min, env[j]);
        }
        const double prominence = height - std::max(left_min, right_min);

        out.push_back({(static_cast<double>(i) + delta) * tr.dt, sign * height / tr.unit_peak,
                       prominence / tr.unit_peak});
    }
    return out;
}

} // namespace hyperlattice
