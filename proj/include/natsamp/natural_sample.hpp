#ifndef NATSAMP_NATURAL_SAMPLE_HPP
#define NATSAMP_NATURAL_SAMPLE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace natsamp {

/// Signal sample with its scaled derivatives at one output instant:
/// a = (T/2) x', b = (T^2/8) x'', c = (T^3/48) x''' for carrier period T.
class NatBlock {
public:
    NatBlock(double s, double a = 0.0, double b = 0.0, double c = 0.0)
        : s_(s), a_(a), b_(b), c_(c) {
        if (!std::isfinite(s) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
            throw std::invalid_argument("NatBlock fields must be finite");
        if (!(std::abs(s) < 1.0)) throw std::domain_error("NatBlock requires |s| < 1");
    }

    double s() const noexcept { return s_; }
    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double c() const noexcept { return c_; }

private:
    double s_, a_, b_, c_;
};

inline constexpr int max_terms = 4;

namespace detail {

// Truncated natural-sampling series in nested form; K is pre-validated.
inline double combine(double s, double a, double b, double c, int K) noexcept {
    switch (K) {
        case 1: return s;
        case 2: return s * (1.0 + a);
        case 3: return s * (1.0 + a + a * a + s * b);
        default: return s * ((1.0 + a) * (1.0 + a * a) + s * ((3.0 * a + 1.0) * b + s * c));
    }
}

inline void check_terms(int K) {
    if (K < 1 || K > max_terms) throw std::invalid_argument("K must be in 1..4");
}

}  // namespace detail

/// Counts natural values that leave [-1, 1]. Conversion never clamps.
struct OvermodulationReport {
    std::size_t count = 0;
    std::size_t first_index = 0;
    double peak = 0.0;

    void observe(std::size_t index, double value) noexcept {
        const double mag = std::abs(value);
        if (mag > peak) peak = mag;
        if (mag > 1.0) {
            if (count == 0) first_index = index;
            ++count;
        }
    }
};

/// Natural sample from the first K terms of the natural-sampling series.
/// K = 1 returns the uniform sample unchanged. No clamping.
inline double natural_sample(const NatBlock& block, int K) {
    detail::check_terms(K);
    return detail::combine(block.s(), block.a(), block.b(), block.c(), K);
}

}  // namespace natsamp

#endif  // NATSAMP_NATURAL_SAMPLE_HPP
