// Independent reference computations shared by the test suites. Nothing
// here calls into the library's numerics.
#ifndef NATSAMP_TEST_SUPPORT_HPP
#define NATSAMP_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

constexpr double pi = std::numbers::pi;

// Hamming-windowed sinc straight from its definition.
inline double windowed_sinc(double t, double t1, double half_support) {
    if (std::abs(t) >= half_support) return 0.0;
    const double u = t / t1;
    const double sinc = u == 0.0 ? 1.0 : std::sin(pi * u) / (pi * u);
    return sinc * (0.54 + 0.46 * std::cos(pi * t / half_support));
}

// Fourth-order central difference of any callable.
template <class F>
double central_difference(const F& f, double t, double h) {
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
}

// A sin(2 pi f (n + 1/2) / fs), evaluated directly.
inline std::vector<double> tone(std::size_t n, double amplitude, double f, double fs) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = amplitude * std::sin(2 * pi * f * (static_cast<double>(i) + 0.5) / fs);
    return x;
}

inline std::vector<double> uniform_noise(std::size_t n, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-amplitude, amplitude);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

inline double rms_difference(const std::vector<double>& a, const std::vector<double>& b,
                             std::size_t first, std::size_t last) {
    double s = 0.0;
    for (std::size_t i = first; i < last; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(last - first));
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("natsamp_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support

#endif
