#ifndef NATSAMP_KERNEL_HPP
#define NATSAMP_KERNEL_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace natsamp {

/// Raised-cosine window a + b cos(pi t / H); Hamming by default.
struct KernelWindow {
    double a = 0.54;
    double b = 0.46;
};

/// Hamming-windowed sinc interpolation kernel with closed-form derivatives.
///
///   f(t) = sinc(t / T1) * (a + b cos(pi t / H))   for |t| < H, 0 otherwise
///
/// where T1 is the input sample period and H the half support. With the
/// default H = 4 T1 the kernel spans the 9-sample window of the polyphase
/// interpolator (64 taps at 8x). Derivatives up to max_order are computed
/// with the product rule over sinc and window; evaluation uses |t| and the
/// parity of the order, so f^(l)(-t) = (-1)^l f^(l)(t) holds exactly.
class Kernel {
public:
    static constexpr int max_order = 3;

    explicit Kernel(double input_period, double half_support_periods = 4.0,
                    KernelWindow window = KernelWindow{})
        : t1_(input_period), h_(half_support_periods), window_(window) {
        if (!(t1_ > 0.0) || !std::isfinite(t1_))
            throw std::invalid_argument("kernel input period must be positive");
        if (!(h_ > 0.0) || !std::isfinite(h_))
            throw std::invalid_argument("kernel half support must be positive");
    }

    double input_period() const noexcept { return t1_; }
    double half_support() const noexcept { return h_ * t1_; }
    double half_support_periods() const noexcept { return h_; }
    const KernelWindow& window() const noexcept { return window_; }

    /// f^(order)(t); exactly 0 for |t| >= half_support().
    double eval(double t, int order = 0) const {
        if (order < 0 || order > max_order)
            throw std::invalid_argument("kernel derivative order must be in 0.." +
                                        std::to_string(max_order));
        if (!std::isfinite(t)) throw std::invalid_argument("kernel argument is not finite");

        const double u = std::abs(t) / t1_;
        if (!(u < h_)) return 0.0;
        if (order == 0) return sinc_value(u) * (window_.a + window_.b * std::cos(std::numbers::pi * u / h_));

        const auto g = sinc_derivatives(u);
        const auto w = window_derivatives(u);

        static constexpr std::array<std::array<double, 4>, 4> binom{{
            {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}}};
        double sum = 0.0;
        for (int j = 0; j <= order; ++j) sum += binom[order][j] * g[j] * w[order - j];

        const double scaled = sum / std::pow(t1_, order);
        return (t < 0.0 && (order & 1)) ? -scaled : scaled;
    }

private:
    static double sinc_value(double u) {
        if (u < 2.0 / std::numbers::pi) return sinc_derivatives(u)[0];
        const double x = std::numbers::pi * u;
        return std::sin(x) / x;
    }

    // d^j/du^j sinc(u) for j = 0..3, u >= 0.
    static std::array<double, 4> sinc_derivatives(double u) {
        constexpr double pi = std::numbers::pi;
        const double x = pi * u;
        std::array<double, 4> s{};
        if (x < 2.0) {
            // sin(x)/x = sum (-1)^n x^2n / (2n+1)!, differentiated termwise
            constexpr int terms = 20;
            std::array<double, 2 * terms + 1> xp{};
            xp[0] = 1.0;
            for (std::size_t i = 1; i < xp.size(); ++i) xp[i] = xp[i - 1] * x;
            double fact = 1.0;  // (2n+1)!
            double sign = 1.0;
            for (int n = 0; n < terms; ++n) {
                if (n > 0) fact *= (2.0 * n) * (2.0 * n + 1.0);
                const int p = 2 * n;
                double falling = 1.0;
                for (int j = 0; j <= 3 && j <= p; ++j) {
                    s[j] += sign * falling * xp[p - j] / fact;
                    falling *= (p - j);
                }
                sign = -sign;
            }
        } else {
            const double sn = std::sin(x), cs = std::cos(x);
            const double x2 = x * x, x3 = x2 * x, x4 = x3 * x;
            s[0] = sn / x;
            s[1] = cs / x - sn / x2;
            s[2] = -sn / x - 2.0 * cs / x2 + 2.0 * sn / x3;
            s[3] = -cs / x + 3.0 * sn / x2 + 6.0 * cs / x3 - 6.0 * sn / x4;
        }
        double scale = 1.0;
        for (auto& v : s) {
            v *= scale;
            scale *= pi;
        }
        return s;
    }

    std::array<double, 4> window_derivatives(double u) const {
        const double k = std::numbers::pi / h_;
        const double c = std::cos(k * u), sn = std::sin(k * u);
        return {window_.a + window_.b * c, -window_.b * k * sn, -window_.b * k * k * c,
                window_.b * k * k * k * sn};
    }

    double t1_;
    double h_;
    KernelWindow window_;
};

/// Per-phase, per-order FIR taps of the polyphase interpolator/differentiator.
///
/// Phase p is evaluated at offset tau_p = (p - (lup - 1) / 2) * T2 from the
/// centre input sample, T2 = T1 / lup, so the lup phases of one input period
/// tile (-T1/2, T1/2) at half-sample instants (for lup = 8: -7T2/2 .. 7T2/2).
/// Tap i in [-k, k] of order l is scale_l * f^(l)(tau_p + i T1), with
/// scale_l = (T2/2)^l / l!, so the order 1..3 outputs are directly the a, b, c
/// inputs of the natural-sample combiner.
class PolyphaseBank {
public:
    PolyphaseBank() = default;

    PolyphaseBank(int lup, int half_width, int orders, double input_period)
        : lup_(lup), k_(half_width), orders_(orders), t1_(input_period) {
        if (lup_ < 2) throw std::invalid_argument("upsampling factor must be >= 2");
        if (k_ < 1) throw std::invalid_argument("half window must be >= 1");
        if (orders_ < 0 || orders_ > Kernel::max_order)
            throw std::invalid_argument("bank orders must be in 0..3");
        if (!(t1_ > 0.0)) throw std::invalid_argument("input period must be positive");
        taps_.assign(static_cast<std::size_t>(lup_) * (orders_ + 1) * length(), 0.0);
    }

    int lup() const noexcept { return lup_; }
    int half_width() const noexcept { return k_; }
    int orders() const noexcept { return orders_; }
    int length() const noexcept { return 2 * k_ + 1; }
    double input_period() const noexcept { return t1_; }
    double output_period() const noexcept { return t1_ / lup_; }

    double phase_offset(int p) const { return (p - 0.5 * (lup_ - 1)) * output_period(); }

    static double derivative_scale(int order, double output_period) {
        double s = 1.0;
        for (int l = 1; l <= order; ++l) s *= 0.5 * output_period / l;
        return s;
    }

    std::span<const double> taps(int phase, int order) const {
        return {taps_.data() + offset(phase, order), static_cast<std::size_t>(length())};
    }
    std::span<double> taps(int phase, int order) {
        return {taps_.data() + offset(phase, order), static_cast<std::size_t>(length())};
    }

    /// Tap at signed index i in [-k, k].
    double tap(int phase, int order, int i) const { return taps(phase, order)[i + k_]; }

    const std::vector<double>& data() const noexcept { return taps_; }

    friend bool operator==(const PolyphaseBank&, const PolyphaseBank&) = default;

private:
    std::size_t offset(int phase, int order) const {
        if (phase < 0 || phase >= lup_ || order < 0 || order > orders_)
            throw std::out_of_range("bank index out of range");
        return (static_cast<std::size_t>(phase) * (orders_ + 1) + order) * length();
    }

    int lup_ = 0;
    int k_ = 0;
    int orders_ = 0;
    double t1_ = 0.0;
    std::vector<double> taps_;
};

struct BankOptions {
    /// Divide each phase's interpolant by its DC gain S(tau) = sum_i f(tau + i T1)
    /// and take the derivative taps from that quotient, so order-0 phases
    /// have unit gain and derivative phases annihilate constants.
    bool normalize_dc = false;
};

inline PolyphaseBank build_polyphase_bank(const Kernel& kernel, int lup, int half_width,
                                          int orders, BankOptions opts = {}) {
    PolyphaseBank bank(lup, half_width, orders, kernel.input_period());
    const double t1 = kernel.input_period();
    const double t2 = bank.output_period();
    const auto len = static_cast<std::size_t>(bank.length());
    std::vector<std::vector<double>> g(static_cast<std::size_t>(orders) + 1, std::vector<double>(len));
    for (int p = 0; p < lup; ++p) {
        const double tau = bank.phase_offset(p);
        for (int l = 0; l <= orders; ++l)
            for (int i = -half_width; i <= half_width; ++i)
                g[l][static_cast<std::size_t>(i + half_width)] = kernel.eval(tau + i * t1, l);

        if (opts.normalize_dc) {
            // g = n S, so n^(l) = (g^(l) - sum_{j<l} C(l,j) n^(j) S^(l-j)) / S.
            std::array<double, Kernel::max_order + 1> sum{};
            for (int l = 0; l <= orders; ++l)
                for (double v : g[l]) sum[l] += v;
            static constexpr int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
            for (int l = 0; l <= orders; ++l)
                for (std::size_t i = 0; i < len; ++i) {
                    double v = g[l][i];
                    for (int j = 0; j < l; ++j) v -= binom[l][j] * g[j][i] * sum[l - j];
                    g[l][i] = v / sum[0];
                }
        }

        for (int l = 0; l <= orders; ++l) {
            const double scale = PolyphaseBank::derivative_scale(l, t2);
            auto taps = bank.taps(p, l);
            for (std::size_t i = 0; i < len; ++i) taps[i] = scale * g[l][i];
        }
    }
    return bank;
}

/// Variant that checks a caller-supplied output period against T1 / lup.
inline PolyphaseBank build_polyphase_bank(const Kernel& kernel, int lup, int half_width,
                                          int orders, double output_period,
                                          BankOptions opts = {}) {
    const double expected = kernel.input_period() / lup;
    if (!(std::abs(output_period - expected) <= 1e-12 * expected))
        throw std::invalid_argument("output period is not input period / lup");
    return build_polyphase_bank(kernel, lup, half_width, orders, opts);
}

/// Largest |sum of order-0 taps - 1| over phases.
inline double dc_gain_error(const PolyphaseBank& bank) {
    double worst = 0.0;
    for (int p = 0; p < bank.lup(); ++p) {
        double sum = 0.0;
        for (double v : bank.taps(p, 0)) sum += v;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

/// Full-rate FIR of a given derivative order, for zero-insertion upsampling.
///
/// taps[j - first] = scale_l * f^(l)((j + 1/2 - lup/2) * T2) over every j
/// whose argument lies inside the kernel support. Convolving the
/// zero-stuffed input v (v[q*lup] = x[q]) gives output m at the same instant
/// as phase (m mod lup) of input block m / lup.
struct FullRateFilter {
    std::vector<double> taps;
    long first = 0;
};

inline FullRateFilter design_full_rate_filter(const Kernel& kernel, int lup, int order) {
    if (lup < 2) throw std::invalid_argument("upsampling factor must be >= 2");
    const double t2 = kernel.input_period() / lup;
    const double scale = PolyphaseBank::derivative_scale(order, t2);
    const double h = kernel.half_support();
    const long reach = static_cast<long>(std::ceil(h / t2)) + lup;
    FullRateFilter f;
    bool started = false;
    for (long j = -reach; j <= reach; ++j) {
        const double t = (static_cast<double>(j) + 0.5 - 0.5 * lup) * t2;
        if (!(std::abs(t) < h)) continue;
        if (!started) {
            f.first = j;
            started = true;
        }
        f.taps.push_back(scale * kernel.eval(t, order));
    }
    return f;
}

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.append(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("malformed number '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("malformed integer '" + std::string(s) + "'");
    return v;
}

}  // namespace detail

/// Coefficient table: metadata comment lines, a column header, then one
/// row per (phase, order, index) in phase-major order with 17 significant
/// digits. Locale independent.
inline std::string dump_bank(const PolyphaseBank& bank) {
    std::string out = "# natsamp polyphase bank\n";
    out += "# lup " + std::to_string(bank.lup()) + "\n";
    out += "# half_width " + std::to_string(bank.half_width()) + "\n";
    out += "# orders " + std::to_string(bank.orders()) + "\n";
    out += "# input_period ";
    detail::append_double(out, bank.input_period());
    out += "\nphase order index value\n";
    for (int p = 0; p < bank.lup(); ++p)
        for (int l = 0; l <= bank.orders(); ++l)
            for (int i = -bank.half_width(); i <= bank.half_width(); ++i) {
                out += std::to_string(p) + ' ' + std::to_string(l) + ' ' + std::to_string(i) + ' ';
                detail::append_double(out, bank.tap(p, l, i));
                out += '\n';
            }
    return out;
}

/// Same rows as dump_bank with a `phase,order,index,value` header and no metadata.
inline std::string export_bank_csv(const PolyphaseBank& bank) {
    std::string out = "phase,order,index,value\n";
    for (int p = 0; p < bank.lup(); ++p)
        for (int l = 0; l <= bank.orders(); ++l)
            for (int i = -bank.half_width(); i <= bank.half_width(); ++i) {
                out += std::to_string(p) + ',' + std::to_string(l) + ',' + std::to_string(i) + ',';
                detail::append_double(out, bank.tap(p, l, i));
                out += '\n';
            }
    return out;
}

/// Inverse of dump_bank.
inline PolyphaseBank parse_bank(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    long lup = -1, k = -1, orders = -1;
    double t1 = -1.0;
    std::size_t line_no = 0;
    bool header_seen = false;
    PolyphaseBank bank;
    std::size_t rows = 0;

    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("bank line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok[0] == "#") {
            if (tok.size() != 3) continue;
            if (tok[1] == "lup") lup = detail::parse_long(tok[2]);
            else if (tok[1] == "half_width") k = detail::parse_long(tok[2]);
            else if (tok[1] == "orders") orders = detail::parse_long(tok[2]);
            else if (tok[1] == "input_period") t1 = detail::parse_double(tok[2]);
            continue;
        }
        if (!header_seen) {
            if (tok.size() != 4 || tok[0] != "phase") fail("expected column header");
            if (lup < 0 || k < 0 || orders < 0 || !(t1 > 0.0)) fail("missing metadata");
            bank = PolyphaseBank(static_cast<int>(lup), static_cast<int>(k),
                                 static_cast<int>(orders), t1);
            header_seen = true;
            continue;
        }
        if (tok.size() != 4) fail("expected 4 columns");
        const auto p = detail::parse_long(tok[0]);
        const auto l = detail::parse_long(tok[1]);
        const auto i = detail::parse_long(tok[2]);
        if (p < 0 || p >= lup || l < 0 || l > orders || i < -k || i > k) fail("index out of range");
        bank.taps(static_cast<int>(p), static_cast<int>(l))[i + k] = detail::parse_double(tok[3]);
        ++rows;
    }
    if (!header_seen) throw std::invalid_argument("bank table has no header");
    if (rows != bank.data().size())
        throw std::invalid_argument("bank table has " + std::to_string(rows) + " rows, expected " +
                                    std::to_string(bank.data().size()));
    return bank;
}

}  // namespace natsamp

#endif  // NATSAMP_KERNEL_HPP
