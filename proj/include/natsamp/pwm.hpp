#ifndef NATSAMP_PWM_HPP
#define NATSAMP_PWM_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "signal.hpp"

namespace natsamp {

/// Full-scale convention of the downcounter width code.
enum class FullScale {
    max_code,  ///< w = 1 maps to 2^B - 1 (unsigned B-bit range)
    power_of_two,  ///< w = 1 maps to 2^B, clipped to 2^B - 1
};

/// Trailing-edge PWM: period k starts high at kT and falls at (k + w_k) T.
/// Levels are +1 during the pulse and -1 otherwise.
struct PwmWaveform {
    double carrier_period = 0.0;
    std::vector<double> widths;  ///< normalized, in [0, 1]

    /// Downcounter codes when quantized; the pulse then lasts code ticks of
    /// T / 2^bits.
    std::optional<int> bits;
    std::vector<std::uint32_t> codes;

    std::size_t size() const noexcept { return widths.size(); }
    double carrier_frequency() const noexcept { return 1.0 / carrier_period; }
    double duration() const noexcept { return carrier_period * static_cast<double>(widths.size()); }

    /// Effective pulse width in [0, 1] of period k, honouring quantization.
    double effective_width(std::size_t k) const {
        if (bits) return static_cast<double>(codes[k]) / static_cast<double>(1u << *bits);
        return widths[k];
    }
};

/// One pulse per sample, w_k = (1 + x_k) / 2. Fed with natural values this
/// is the digital natural-sampling modulator; fed with uniform samples it is
/// uniform-sampling PWM.
inline PwmWaveform uniform_pwm(const SampleStream& stream) {
    PwmWaveform w;
    w.carrier_period = stream.period();
    w.widths.reserve(stream.size());
    for (std::size_t k = 0; k < stream.size(); ++k) {
        const double x = stream[k];
        if (!(std::abs(x) <= 1.0))
            throw amplitude_error(k, x);
        w.widths.push_back(0.5 * (1.0 + x));
    }
    return w;
}

/// Clamps to [-1, 1] before modulation; returns the number of clamped samples.
inline std::size_t clamp_to_unit(std::vector<double>& values) {
    std::size_t n = 0;
    for (double& v : values) {
        if (v > 1.0) { v = 1.0; ++n; }
        else if (v < -1.0) { v = -1.0; ++n; }
    }
    return n;
}

inline void check_bits(int bits) {
    if (bits < 4 || bits > 16) throw std::invalid_argument("bits must be in 4..16");
}

/// Downcounter load value for width w: nearest, ties to even.
inline std::uint32_t quantize_width(double w, int bits, FullScale scale = FullScale::max_code) {
    check_bits(bits);
    const double top = static_cast<double>(1u << bits);
    const double max_code = top - 1.0;
    double code = std::nearbyint(w * (scale == FullScale::max_code ? max_code : top));
    if (code < 0.0) code = 0.0;
    if (code > max_code) code = max_code;
    return static_cast<std::uint32_t>(code);
}

inline PwmWaveform quantize(PwmWaveform wave, int bits, FullScale scale = FullScale::max_code) {
    check_bits(bits);
    wave.bits = bits;
    wave.codes.resize(wave.widths.size());
    for (std::size_t k = 0; k < wave.widths.size(); ++k)
        wave.codes[k] = quantize_width(wave.widths[k], bits, scale);
    return wave;
}

/// Two-level rendering at oversample * f_c. Continuous widths put
/// round(w * oversample) high samples per period; quantized waveforms need
/// oversample to be a multiple of 2^bits so every edge lands on the grid.
inline SampleStream render_binary(const PwmWaveform& wave, int oversample) {
    if (oversample < 1) throw std::invalid_argument("oversample must be positive");
    std::size_t per_tick = 0;
    if (wave.bits) {
        const int ticks = 1 << *wave.bits;
        if (oversample < ticks || oversample % ticks != 0)
            throw std::invalid_argument("oversample " + std::to_string(oversample) +
                                        " cannot place " + std::to_string(*wave.bits) +
                                        "-bit edges exactly");
        per_tick = static_cast<std::size_t>(oversample / ticks);
    }
    const auto os = static_cast<std::size_t>(oversample);
    std::vector<double> out(wave.size() * os, -1.0);
    for (std::size_t k = 0; k < wave.size(); ++k) {
        const std::size_t high = wave.bits
                                     ? static_cast<std::size_t>(wave.codes[k]) * per_tick
                                     : static_cast<std::size_t>(std::nearbyint(wave.widths[k] * oversample));
        for (std::size_t i = 0; i < high && i < os; ++i) out[k * os + i] = 1.0;
    }
    return SampleStream(wave.carrier_frequency() * oversample, std::move(out));
}

}  // namespace natsamp

#endif  // NATSAMP_PWM_HPP
