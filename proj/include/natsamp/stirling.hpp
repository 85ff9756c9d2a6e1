#ifndef NATSAMP_STIRLING_HPP
#define NATSAMP_STIRLING_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "natural_sample.hpp"
#include "signal.hpp"

namespace natsamp {

/// 7-point central-difference stencils producing the scaled derivatives
/// a = (T/2) x', b = (T^2/8) x'', c = (T^3/48) x''' at the centre sample.
/// Index j holds the weight of x[n + j - 3].
struct StirlingStencils {
    static constexpr std::array<double, 7> a{-1.0 / 120, 3.0 / 40, -3.0 / 8, 0.0,
                                             3.0 / 8,    -3.0 / 40, 1.0 / 120};
    static constexpr std::array<double, 7> b{1.0 / 720,  -3.0 / 160, 3.0 / 16, -49.0 / 144,
                                             3.0 / 16,   -3.0 / 160, 1.0 / 720};
    static constexpr std::array<double, 7> c{1.0 / 384,  -1.0 / 48, 13.0 / 384, 0.0,
                                             -13.0 / 384, 1.0 / 48,  -1.0 / 384};
};

struct ScaledDerivatives {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Symmetric pairs are combined first, so constants give exactly zero.
inline ScaledDerivatives stirling_derivatives(std::span<const double> window) {
    if (window.size() != 7) throw std::invalid_argument("stirling window must hold 7 samples");
    ScaledDerivatives d;
    d.b = StirlingStencils::b[3] * window[3];
    for (std::size_t j = 4; j < 7; ++j) {
        const double diff = window[j] - window[6 - j];
        const double sum = window[j] + window[6 - j];
        d.a += StirlingStencils::a[j] * diff;
        d.b += StirlingStencils::b[j] * sum;
        d.c += StirlingStencils::c[j] * diff;
    }
    return d;
}

struct Algorithm1Result {
    SampleStream output;
    OvermodulationReport overmodulation;
};

namespace detail {

inline std::vector<double> algorithm1_core(std::span<const double> x, int K,
                                           OvermodulationReport& report) {
    const std::size_t n = x.size();
    std::vector<double> padded(n + 6, 0.0);
    std::copy(x.begin(), x.end(), padded.begin() + 3);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = stirling_derivatives(std::span<const double>(padded).subspan(i, 7));
        out[i] = combine(x[i], d.a, d.b, d.c, K);
        report.observe(i, out[i]);
    }
    return out;
}

}  // namespace detail

/// Same-rate natural-sample conversion. Samples are taken to sit at
/// (n + 1/2) T; the three samples beyond each end are zero.
inline Algorithm1Result algorithm1_convert(const SampleStream& stream, int K = max_terms) {
    detail::check_terms(K);
    if (stream.size() < 7) throw std::invalid_argument("algorithm I needs at least 7 samples");
    stream.require_amplitude();
    Algorithm1Result r;
    auto out = detail::algorithm1_core(stream.samples(), K, r.overmodulation);
    r.output = SampleStream(stream.rate(), std::move(out));
    return r;
}

/// Pulse width (T/2)(1 + xhat) for a natural value in [-1, 1].
inline double width_from_natural(double xhat, double period) {
    if (!(std::abs(xhat) <= 1.0)) throw std::domain_error("natural value outside [-1, 1]");
    return 0.5 * period * (1.0 + xhat);
}

}  // namespace natsamp

#endif  // NATSAMP_STIRLING_HPP
