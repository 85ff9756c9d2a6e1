#ifndef NATSAMP_SPECTRAL_HPP
#define NATSAMP_SPECTRAL_HPP

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwm.hpp"
#include "signal.hpp"

namespace natsamp {

enum class AnalysisWindow { rect, blackman_harris };

struct Harmonic {
    int order = 0;
    double frequency = 0.0;
    double amplitude = 0.0;
    double level_db = 0.0;
};

/// Single-sided spectrum of a real signal. Levels in dB are relative to the
/// measured fundamental.
struct SpectrumReport {
    double sample_rate = 0.0;
    double bin_resolution = 0.0;
    std::size_t length = 0;                    ///< analysed samples N
    double window_sum = 0.0;                   ///< sum of window weights
    std::vector<std::complex<double>> bins;    ///< unnormalized DFT, N/2 + 1 bins
    std::vector<double> amplitude;             ///< per-bin sinusoid amplitude
    std::vector<double> magnitude_db;
    double fundamental_frequency = 0.0;
    double fundamental_amplitude = 0.0;
    std::vector<Harmonic> harmonics;
    double thd = 0.0;

    double frequency(std::size_t bin) const { return static_cast<double>(bin) * bin_resolution; }
};

inline constexpr double db_floor = -400.0;

inline double amplitude_db(double amplitude, double reference) {
    if (!(amplitude > 0.0) || !(reference > 0.0)) return db_floor;
    return std::max(db_floor, 20.0 * std::log10(amplitude / reference));
}

namespace detail {

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
struct PlanDestroy {
    void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, PlanDestroy>;

template <class T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
    if (!p) throw std::bad_alloc();
    return std::unique_ptr<T[], FftwFree>(p);
}

/// Unnormalized forward DFT of a real sequence, bins 0..N/2.
inline std::vector<std::complex<double>> real_dft(std::span<const double> x) {
    const std::size_t n = x.size();
    auto in = fftw_buffer<double>(n);
    auto out = fftw_buffer<fftw_complex>(n / 2 + 1);
    FftwPlan plan(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    std::copy(x.begin(), x.end(), in.get());
    fftw_execute(plan.get());
    std::vector<std::complex<double>> bins(n / 2 + 1);
    for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = {out[k][0], out[k][1]};
    return bins;
}

/// Inverse of real_dft, including the 1/N factor.
inline std::vector<double> inverse_real_dft(std::span<const std::complex<double>> bins,
                                            std::size_t n) {
    auto in = fftw_buffer<fftw_complex>(n / 2 + 1);
    auto out = fftw_buffer<double>(n);
    FftwPlan plan(fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    for (std::size_t k = 0; k < n / 2 + 1; ++k) {
        in[k][0] = bins[k].real();
        in[k][1] = bins[k].imag();
    }
    fftw_execute(plan.get());
    std::vector<double> y(out.get(), out.get() + n);
    for (double& v : y) v /= static_cast<double>(n);
    return y;
}

inline std::vector<double> window_weights(std::size_t n, AnalysisWindow w) {
    std::vector<double> weights(n, 1.0);
    if (w == AnalysisWindow::blackman_harris) {
        constexpr double a0 = 0.35875, a1 = 0.48829, a2 = 0.14128, a3 = 0.01168;
        const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = step * static_cast<double>(i);
            weights[i] = a0 - a1 * std::cos(t) + a2 * std::cos(2 * t) - a3 * std::cos(3 * t);
        }
    }
    return weights;
}

inline std::size_t peak_bin(const SpectrumReport& r, double f) {
    const auto centre = static_cast<long>(std::lround(f / r.bin_resolution));
    const long last = static_cast<long>(r.amplitude.size()) - 1;
    std::size_t best = static_cast<std::size_t>(std::clamp(centre, 0L, last));
    for (long b = std::max(0L, centre - 1); b <= std::min(last, centre + 1); ++b)
        if (r.amplitude[static_cast<std::size_t>(b)] > r.amplitude[best])
            best = static_cast<std::size_t>(b);
    return best;
}

}  // namespace detail

/// Magnitude spectrum. With f0 the fundamental is the strongest bin within
/// one bin of f0; otherwise the strongest non-DC bin.
inline SpectrumReport spectrum(const SampleStream& signal,
                               AnalysisWindow window = AnalysisWindow::rect,
                               std::optional<double> f0 = std::nullopt) {
    if (signal.empty()) throw std::invalid_argument("cannot analyse an empty signal");
    const std::size_t n = signal.size();
    const auto w = detail::window_weights(n, window);
    std::vector<double> xw(n);
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xw[i] = signal[i] * w[i];
        wsum += w[i];
    }

    SpectrumReport r;
    r.sample_rate = signal.rate();
    r.length = n;
    r.bin_resolution = signal.rate() / static_cast<double>(n);
    r.window_sum = wsum;
    r.bins = detail::real_dft(xw);
    r.amplitude.resize(r.bins.size());
    for (std::size_t k = 0; k < r.bins.size(); ++k) {
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        r.amplitude[k] = std::abs(r.bins[k]) * (edge ? 1.0 : 2.0) / wsum;
    }

    std::size_t fund = 0;
    if (f0) {
        fund = detail::peak_bin(r, *f0);
    } else {
        for (std::size_t k = 1; k < r.amplitude.size(); ++k)
            if (fund == 0 || r.amplitude[k] > r.amplitude[fund]) fund = k;
    }
    r.fundamental_frequency = r.frequency(fund);
    r.fundamental_amplitude = r.amplitude[fund];
    r.magnitude_db.resize(r.amplitude.size());
    for (std::size_t k = 0; k < r.amplitude.size(); ++k)
        r.magnitude_db[k] = amplitude_db(r.amplitude[k], r.fundamental_amplitude);
    return r;
}

/// Signal energy sum |x|^2 recovered from the single-sided bins (Parseval).
/// Meaningful for the rectangular window.
inline double spectral_energy(const SpectrumReport& r) {
    const std::size_t n = r.length;
    double e = 0.0;
    for (std::size_t k = 0; k < r.bins.size(); ++k) {
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        e += std::norm(r.bins[k]) * (edge ? 1.0 : 2.0);
    }
    return e / static_cast<double>(n);
}

/// Levels of order * f0 in dB relative to the fundamental, each the
/// strongest bin within one bin of the nominal frequency.
inline std::vector<Harmonic> harmonics(const SpectrumReport& r, double f0,
                                       std::span<const int> orders) {
    const double nyquist = 0.5 * r.sample_rate;
    std::vector<Harmonic> out;
    for (int h : orders) {
        if (h < 1) throw std::invalid_argument("harmonic order must be positive");
        const double f = h * f0;
        if (!(f < nyquist))
            throw std::domain_error("harmonic " + std::to_string(h) + " at " + std::to_string(f) +
                                    " Hz is at or beyond Nyquist " + std::to_string(nyquist) + " Hz");
        const auto bin = detail::peak_bin(r, f);
        out.push_back({h, f, r.amplitude[bin], amplitude_db(r.amplitude[bin], r.fundamental_amplitude)});
    }
    return out;
}

inline std::vector<double> harmonic_levels(const SpectrumReport& r, double f0,
                                           std::span<const int> orders) {
    std::vector<double> levels;
    for (const auto& h : harmonics(r, f0, orders)) levels.push_back(h.level_db);
    return levels;
}

/// Fills r.harmonics and r.thd (root-sum-square harmonic amplitude over the
/// fundamental amplitude) for the given orders.
inline void analyze_harmonics(SpectrumReport& r, double f0, std::span<const int> orders) {
    r.harmonics = harmonics(r, f0, orders);
    double sq = 0.0;
    for (const auto& h : r.harmonics) sq += h.amplitude * h.amplitude;
    r.thd = r.fundamental_amplitude > 0.0 ? std::sqrt(sq) / r.fundamental_amplitude : 0.0;
}

/// Brick-wall low-pass: zero every DFT bin above cutoff.
inline SampleStream demodulate(const SampleStream& signal, double cutoff) {
    if (!(cutoff > 0.0) || !(cutoff < 0.5 * signal.rate()))
        throw std::invalid_argument("cutoff must lie in (0, sample_rate / 2)");
    if (signal.empty()) throw std::invalid_argument("cannot demodulate an empty signal");
    const std::size_t n = signal.size();
    auto bins = detail::real_dft(signal.samples());
    const double res = signal.rate() / static_cast<double>(n);
    for (std::size_t k = 0; k < bins.size(); ++k)
        if (static_cast<double>(k) * res > cutoff) bins[k] = 0.0;
    return SampleStream(signal.rate(), detail::inverse_real_dft(bins, n));
}

/// Ideal analog low-pass of a continuous-edge PWM waveform, treated as one
/// period of a periodic signal of duration N T.
///
/// Fourier coefficients are computed in closed form per pulse, so no render
/// grid or aliasing is involved:
///   c_0 = mean(2 w_k - 1),
///   c_j = (i / (pi j)) * sum_k exp(-2 pi i j (k + w_k) / N),  0 < j < N.
/// The result is sampled at samples_per_period * f_c.
inline SampleStream demodulate_pwm(const PwmWaveform& wave, double cutoff,
                                   int samples_per_period = 1) {
    if (wave.size() == 0) throw std::invalid_argument("cannot demodulate an empty waveform");
    if (samples_per_period < 1) throw std::invalid_argument("samples_per_period must be >= 1");
    const double rate = wave.carrier_frequency() * samples_per_period;
    if (!(cutoff > 0.0) || !(cutoff < 0.5 * rate))
        throw std::invalid_argument("cutoff must lie in (0, output_rate / 2)");

    const std::size_t n = wave.size();
    const double duration = wave.duration();
    const auto top = static_cast<std::size_t>(std::floor(cutoff * duration + 1e-9));
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double nd = static_cast<double>(n);

    std::vector<std::complex<double>> sums(top + 1, 0.0);
    double dc = 0.0;
    constexpr std::size_t reanchor = 64;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = wave.effective_width(k);
        dc += 2.0 * w - 1.0;
        const double pos = static_cast<double>(k) + w;  // trailing edge, in periods
        const std::complex<double> step = std::polar(1.0, -two_pi * pos / nd);
        std::complex<double> cur = 1.0;
        for (std::size_t j = 1; j <= top; ++j) {
            if (j % reanchor == 0) {
                // exact phase: j (k + w) mod N, with the integer part reduced exactly
                const auto jk = (j * k) % n;
                const double ph = std::fmod(static_cast<double>(jk) + static_cast<double>(j) * w, nd);
                cur = std::polar(1.0, -two_pi * ph / nd);
            } else {
                cur *= step;
            }
            sums[j] += cur;
        }
    }

    const std::size_t m = n * static_cast<std::size_t>(samples_per_period);
    std::vector<std::complex<double>> bins(m / 2 + 1, 0.0);
    const double scale = static_cast<double>(m);
    bins[0] = dc / nd * scale;
    for (std::size_t j = 1; j <= top && j < bins.size(); ++j) {
        const std::complex<double> c = std::complex<double>(0.0, 1.0) / (std::numbers::pi * static_cast<double>(j)) * sums[j];
        bins[j] = c * scale;
    }
    if (m % 2 == 0 && top >= m / 2) bins[m / 2] = bins[m / 2].real();
    return SampleStream(rate, detail::inverse_real_dft(bins, m));
}

}  // namespace natsamp

#endif  // NATSAMP_SPECTRAL_HPP
