#ifndef NATSAMP_ORACLE_HPP
#define NATSAMP_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kernel.hpp"

namespace natsamp {

/// Sum of sinusoids with exact derivatives of any order.
class AnalyticSignal {
public:
    struct Tone {
        double amplitude = 0.0;
        double frequency = 0.0;  ///< Hz
        double phase = 0.0;      ///< rad
    };

    AnalyticSignal() = default;

    explicit AnalyticSignal(std::vector<Tone> tones) : tones_(std::move(tones)) {
        double total = 0.0;
        for (const auto& t : tones_) {
            if (!std::isfinite(t.amplitude) || !std::isfinite(t.frequency) || !std::isfinite(t.phase))
                throw std::invalid_argument("tone parameters must be finite");
            total += std::abs(t.amplitude);
        }
        if (!(total < 1.0)) throw std::domain_error("total tone amplitude must be below 1");
    }

    static AnalyticSignal tone(double amplitude, double frequency, double phase = 0.0) {
        return AnalyticSignal({{amplitude, frequency, phase}});
    }

    /// A constant is a zero-frequency tone with phase pi/2.
    static AnalyticSignal constant(double value) {
        return AnalyticSignal({{value, 0.0, std::numbers::pi / 2}});
    }

    const std::vector<Tone>& tones() const noexcept { return tones_; }

    double operator()(double t) const { return derivative(t, 0); }

    double derivative(double t, int order) const {
        if (order < 0) throw std::invalid_argument("derivative order must be >= 0");
        double sum = 0.0;
        for (const auto& tn : tones_) {
            const double w = 2.0 * std::numbers::pi * tn.frequency;
            if (order > 0 && w == 0.0) continue;
            sum += tn.amplitude * std::pow(w, order) *
                   std::sin(w * t + tn.phase + order * std::numbers::pi / 2);
        }
        return sum;
    }

private:
    std::vector<Tone> tones_;
};

inline constexpr int max_series_terms = 6;

/// N-term truncation of the natural-sampling series
///   xhat = x + sum_{n=1}^{N-1} (T/2)^n / (n+1)! d^n/dt^n [x^(n+1)]
/// from the derivatives x, x', ..., x^(N-1) at one instant. Each
/// d^n[x^(n+1)] is n! times the degree-n Taylor coefficient of the
/// truncated power series of x raised to n+1.
inline double series_from_derivatives(std::span<const double> derivs, double period, int terms) {
    if (terms < 1 || terms > max_series_terms)
        throw std::invalid_argument("series terms must be in 1.." + std::to_string(max_series_terms));
    if (derivs.size() < static_cast<std::size_t>(terms))
        throw std::invalid_argument("series needs derivatives up to order N-1");

    // Taylor coefficients x^(j) / j!
    std::vector<double> taylor(static_cast<std::size_t>(terms));
    double fact = 1.0;
    for (int j = 0; j < terms; ++j) {
        if (j > 0) fact *= j;
        taylor[static_cast<std::size_t>(j)] = derivs[static_cast<std::size_t>(j)] / fact;
    }

    double result = derivs[0];
    std::vector<double> power = taylor;  // x^(n+1) series, starting at n = 0
    double eps_pow = 1.0, nfact = 1.0;
    for (int n = 1; n < terms; ++n) {
        std::vector<double> next(taylor.size(), 0.0);
        for (std::size_t i = 0; i < taylor.size(); ++i)
            for (std::size_t j = 0; i + j < taylor.size(); ++j) next[i + j] += power[i] * taylor[j];
        power = std::move(next);
        eps_pow *= 0.5 * period;
        nfact *= n;
        const double dn = nfact * power[static_cast<std::size_t>(n)];  // d^n/dt^n x^(n+1)
        result += eps_pow / (nfact * (n + 1)) * dn;
    }
    return result;
}

/// Series truncation at instant t (the centre of the carrier period whose
/// natural sample it approximates).
inline double series_natural(const AnalyticSignal& signal, double t, double period, int terms) {
    if (terms < 1 || terms > max_series_terms)
        throw std::invalid_argument("series terms must be in 1.." + std::to_string(max_series_terms));
    std::vector<double> d(static_cast<std::size_t>(terms));
    for (int j = 0; j < terms; ++j) d[static_cast<std::size_t>(j)] = signal.derivative(t, j);
    return series_from_derivatives(d, period, terms);
}

/// Carrier crossing in one period.
struct NaturalCrossing {
    double time = 0.0;
    double value = 0.0;
};

struct RootOptions {
    double time_origin = 0.0;   ///< start of period 0
    double tolerance = 1e-14;   ///< bracket width, in periods
    int probes = 64;            ///< sign samples used to detect multiple crossings
};

/// Solves x(t) = ramp(t) inside period k, where the ramp rises from -1 at
/// the start of the period to +1 at its end. Bracketed bisection after a
/// sign scan; more than one sign change means the crossing is not unique.
template <class Curve>
NaturalCrossing root_find_crossing(const Curve& x, double period, std::int64_t k,
                                   const RootOptions& opts = {}) {
    if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
    if (opts.probes < 1) throw std::invalid_argument("probes must be >= 1");
    const double start = opts.time_origin + static_cast<double>(k) * period;
    auto g = [&](double u) { return x(start + u * period) - (2.0 * u - 1.0); };

    double lo = 0.0, hi = 0.0;
    int changes = 0;
    double prev_u = 0.0, prev_g = g(0.0);
    if (prev_g == 0.0) return {start, x(start)};
    for (int i = 1; i <= opts.probes; ++i) {
        const double u = static_cast<double>(i) / opts.probes;
        const double gv = g(u);
        if ((prev_g > 0.0) != (gv > 0.0) || gv == 0.0) {
            ++changes;
            lo = prev_u;
            hi = u;
        }
        prev_u = u;
        prev_g = gv;
    }
    if (changes == 0)
        throw std::domain_error("no carrier crossing in period " + std::to_string(k));
    if (changes > 1)
        throw std::domain_error("multiple carrier crossings in period " + std::to_string(k));

    const bool lo_positive = g(lo) > 0.0;
    while (hi - lo > opts.tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (gm == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((gm > 0.0) == lo_positive) lo = mid;
        else hi = mid;
    }
    const double u = 0.5 * (lo + hi);
    const double t = start + u * period;
    return {t, x(t)};
}

/// Natural sample of period k.
template <class Curve>
double root_find_natural(const Curve& x, double period, std::int64_t k,
                         const RootOptions& opts = {}) {
    return root_find_crossing(x, period, k, opts).value;
}

/// The continuous curve the interpolator fits through a sample sequence:
///   y(t) = sum_q x[q] f(t - (q + 1/2) T1),
/// with samples outside the sequence taken as zero.
class FittedCurve {
public:
    FittedCurve(std::vector<double> samples, Kernel kernel)
        : x_(std::move(samples)), kernel_(kernel) {}

    double operator()(double t) const { return derivative(t, 0); }

    double derivative(double t, int order) const {
        const double t1 = kernel_.input_period();
        const double reach = kernel_.half_support_periods();
        const double centre = t / t1 - 0.5;
        const auto lo = static_cast<long>(std::floor(centre - reach));
        const auto hi = static_cast<long>(std::ceil(centre + reach));
        double sum = 0.0;
        for (long q = std::max(lo, 0L); q <= hi && q < static_cast<long>(x_.size()); ++q)
            sum += x_[static_cast<std::size_t>(q)] * kernel_.eval(t - (static_cast<double>(q) + 0.5) * t1, order);
        return sum;
    }

    const Kernel& kernel() const noexcept { return kernel_; }
    const std::vector<double>& samples() const noexcept { return x_; }

private:
    std::vector<double> x_;
    Kernel kernel_;
};

struct Theorem2Result {
    double method1 = 0.0;  ///< fitted curve evaluated at tau
    double method2 = 0.0;  ///< convolution with taps h[n] = f(n T + tau)
};

/// Evaluates a (2k+1)-sample window (centre sample at time 0) at tau two
/// ways: through the interpolating curve, and as a convolution with taps
/// sampled from the shifted kernel.
inline Theorem2Result theorem2_check(std::span<const double> window, double tau,
                                     const Kernel& kernel) {
    if (window.size() % 2 != 1) throw std::invalid_argument("window length must be odd");
    const long k = static_cast<long>(window.size() / 2);
    const double t1 = kernel.input_period();
    if (!(std::abs(tau) <= k * t1)) throw std::invalid_argument("tau outside the window span");

    auto sample = [&](long n) { return window[static_cast<std::size_t>(n + k)]; };

    // Method 1: x(t) = sum_n x[n] f(t - nT), then t = tau.
    auto curve = [&](double t) {
        double y = 0.0;
        for (long n = -k; n <= k; ++n) y += sample(n) * kernel.eval(t - n * t1, 0);
        return y;
    };

    // Method 2: h[n] = f(nT + tau); x(tau) = sum_n x[n] h[-n].
    std::vector<double> h(window.size());
    for (long n = -k; n <= k; ++n) h[static_cast<std::size_t>(n + k)] = kernel.eval(n * t1 + tau, 0);
    double conv = 0.0;
    for (long n = -k; n <= k; ++n) conv += sample(n) * h[static_cast<std::size_t>(-n + k)];

    return {curve(tau), conv};
}

}  // namespace natsamp

#endif  // NATSAMP_ORACLE_HPP
