#ifndef NATSAMP_CONVERTER_HPP
#define NATSAMP_CONVERTER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernel.hpp"
#include "natural_sample.hpp"
#include "signal.hpp"
#include "stirling.hpp"

namespace natsamp {

enum class EdgePolicy {
    zero_pad,     ///< samples beyond either end are 0
    extend_edge,  ///< samples beyond either end repeat the end sample
};

struct ConversionConfig {
    int lup = 8;
    int terms = 4;       ///< K, number of series terms in the combiner
    int half_width = 4;  ///< k; the interpolator fits 2k+1 input samples
    /// Kernel half support in input periods; 32 reproduces the literal
    /// window argument of the original kernel formula.
    double kernel_half_support = 4.0;
    EdgePolicy edge = EdgePolicy::zero_pad;
    bool normalize_dc = false;

    void validate() const {
        if (lup < 2) throw std::invalid_argument("lup must be >= 2");
        detail::check_terms(terms);
        if (half_width < 1) throw std::invalid_argument("half window k must be >= 1");
        if (!(kernel_half_support > 0.0))
            throw std::invalid_argument("kernel half support must be positive");
    }
};

inline Kernel make_kernel(const ConversionConfig& cfg, double input_rate) {
    return Kernel(1.0 / input_rate, cfg.kernel_half_support);
}

inline PolyphaseBank make_bank(const ConversionConfig& cfg, double input_rate) {
    cfg.validate();
    return build_polyphase_bank(make_kernel(cfg, input_rate), cfg.lup, cfg.half_width,
                                Kernel::max_order, BankOptions{cfg.normalize_dc});
}

/// Signal and scaled derivative samples at every output instant.
struct LinearStageOutput {
    std::vector<double> s, a, b, c;

    std::size_t size() const noexcept { return s.size(); }
};

struct ConversionResult {
    SampleStream output;
    OvermodulationReport overmodulation;
    double dc_gain_error = 0.0;
};

namespace detail {

inline void check_bank(const PolyphaseBank& bank, std::size_t window, int K) {
    if (window != static_cast<std::size_t>(bank.length()))
        throw std::invalid_argument("window length " + std::to_string(window) +
                                    " does not match bank length " +
                                    std::to_string(bank.length()));
    if (bank.orders() < K - 1)
        throw std::invalid_argument("bank lacks the derivative orders needed for K = " +
                                    std::to_string(K));
}

// Convolution of the window with one phase filter: sum_i x[n+i] h[-i].
inline double apply_phase(std::span<const double> window, std::span<const double> taps) {
    const std::size_t last = taps.size() - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < window.size(); ++j) acc += window[j] * taps[last - j];
    return acc;
}

inline std::vector<double> pad_input(std::span<const double> x, std::size_t halo,
                                     EdgePolicy edge) {
    std::vector<double> padded(x.size() + 2 * halo, 0.0);
    std::copy(x.begin(), x.end(), padded.begin() + static_cast<std::ptrdiff_t>(halo));
    if (edge == EdgePolicy::extend_edge && !x.empty()) {
        std::fill_n(padded.begin(), halo, x.front());
        std::fill(padded.end() - static_cast<std::ptrdiff_t>(halo), padded.end(), x.back());
    }
    return padded;
}

}  // namespace detail

/// Linear stage for one input window: per phase, the order 0..orders outputs.
/// Result is laid out [phase][order].
inline std::vector<double> linear_block(std::span<const double> window,
                                        const PolyphaseBank& bank) {
    detail::check_bank(bank, window.size(), 1);
    std::vector<double> out(static_cast<std::size_t>(bank.lup()) * (bank.orders() + 1));
    std::size_t idx = 0;
    for (int p = 0; p < bank.lup(); ++p)
        for (int l = 0; l <= bank.orders(); ++l) out[idx++] = detail::apply_phase(window, bank.taps(p, l));
    return out;
}

/// Lup natural samples for the window centred on one input sample, in
/// increasing time order.
inline std::vector<double> convert_block(std::span<const double> window,
                                         const PolyphaseBank& bank, int K) {
    detail::check_terms(K);
    detail::check_bank(bank, window.size(), K);
    std::vector<double> out(static_cast<std::size_t>(bank.lup()));
    for (int p = 0; p < bank.lup(); ++p) {
        double d[4] = {0.0, 0.0, 0.0, 0.0};
        for (int l = 0; l < K; ++l) d[l] = detail::apply_phase(window, bank.taps(p, l));
        out[p] = detail::combine(d[0], d[1], d[2], d[3], K);
    }
    return out;
}

/// Polyphase linear stage over a whole input. Output m = n * lup + p sits at
/// (m + 1/2) T2 when input n sits at (n + 1/2) T1.
inline LinearStageOutput linear_stage(std::span<const double> input, const PolyphaseBank& bank,
                                      EdgePolicy edge = EdgePolicy::zero_pad) {
    const auto k = static_cast<std::size_t>(bank.half_width());
    const auto padded = detail::pad_input(input, k, edge);
    const auto len = static_cast<std::size_t>(bank.length());
    const auto lup = static_cast<std::size_t>(bank.lup());

    LinearStageOutput r;
    const std::size_t total = input.size() * lup;
    r.s.assign(total, 0.0);
    r.a.assign(total, 0.0);
    r.b.assign(total, 0.0);
    r.c.assign(total, 0.0);
    std::vector<double>* outs[4] = {&r.s, &r.a, &r.b, &r.c};
    for (std::size_t n = 0; n < input.size(); ++n) {
        const std::span<const double> window(padded.data() + n, len);
        for (std::size_t p = 0; p < lup; ++p)
            for (int l = 0; l <= std::min(bank.orders(), 3); ++l)
                (*outs[l])[n * lup + p] = detail::apply_phase(window, bank.taps(static_cast<int>(p), l));
    }
    return r;
}

/// Zero-insertion upsampling followed by full-rate convolution with the
/// order-l kernel filter; the direct-form counterpart of linear_stage.
inline std::vector<double> direct_form_stage(std::span<const double> input, const Kernel& kernel,
                                             int lup, int order,
                                             EdgePolicy edge = EdgePolicy::zero_pad) {
    const auto filter = design_full_rate_filter(kernel, lup, order);
    const long L = lup;
    const long halo = static_cast<long>(std::ceil(kernel.half_support_periods())) + 1;
    const auto padded = detail::pad_input(input, static_cast<std::size_t>(halo), edge);

    // v[j] for j in [-halo*L, (N+halo)*L); nonzero only at multiples of L.
    const long n_in = static_cast<long>(input.size());
    const long base = halo * L;
    std::vector<double> stuffed(static_cast<std::size_t>((n_in + 2 * halo) * L), 0.0);
    for (std::size_t q = 0; q < padded.size(); ++q) stuffed[q * static_cast<std::size_t>(L)] = padded[q];

    std::vector<double> out(static_cast<std::size_t>(n_in * L), 0.0);
    const long ntaps = static_cast<long>(filter.taps.size());
    for (long m = 0; m < n_in * L; ++m) {
        double acc = 0.0;
        for (long i = 0; i < ntaps; ++i) {
            const long j = m - (filter.first + i) + base;
            if (j < 0 || j >= static_cast<long>(stuffed.size())) continue;
            acc += filter.taps[static_cast<std::size_t>(i)] * stuffed[static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(m)] = acc;
    }
    return out;
}

/// Combined upsampling, interpolation, differentiation and natural-sample
/// conversion. Output rate is lup times the input rate.
inline ConversionResult convert_stream(const SampleStream& input, const ConversionConfig& cfg) {
    cfg.validate();
    if (input.empty()) throw std::invalid_argument("input stream is empty");
    input.require_amplitude();
    const auto bank = make_bank(cfg, input.rate());
    const auto lin = linear_stage(input.samples(), bank, cfg.edge);

    ConversionResult r;
    std::vector<double> out(lin.size());
    for (std::size_t m = 0; m < out.size(); ++m) {
        out[m] = detail::combine(lin.s[m], lin.a[m], lin.b[m], lin.c[m], cfg.terms);
        r.overmodulation.observe(m, out[m]);
    }
    r.output = SampleStream(input.rate() * cfg.lup, std::move(out));
    r.dc_gain_error = dc_gain_error(bank);
    return r;
}

/// Two-stage reference pipeline: direct-form interpolation to lup * f1,
/// then same-rate Stirling conversion on the interpolated stream.
inline ConversionResult baseline_convert(const SampleStream& input, const ConversionConfig& cfg) {
    cfg.validate();
    if (input.empty()) throw std::invalid_argument("input stream is empty");
    input.require_amplitude();
    const auto kernel = make_kernel(cfg, input.rate());
    auto raw_cfg = cfg;
    raw_cfg.normalize_dc = false;
    const auto raw = make_bank(raw_cfg, input.rate());

    auto interp = direct_form_stage(input.samples(), kernel, cfg.lup, 0, cfg.edge);
    if (cfg.normalize_dc) {
        std::vector<double> gain(static_cast<std::size_t>(cfg.lup), 0.0);
        for (int p = 0; p < cfg.lup; ++p)
            for (double v : raw.taps(p, 0)) gain[static_cast<std::size_t>(p)] += v;
        for (std::size_t m = 0; m < interp.size(); ++m) interp[m] /= gain[m % gain.size()];
    }

    ConversionResult r;
    auto out = detail::algorithm1_core(interp, cfg.terms, r.overmodulation);
    r.output = SampleStream(input.rate() * cfg.lup, std::move(out));
    r.dc_gain_error = dc_gain_error(raw);
    return r;
}

/// Block-at-a-time form of convert_stream with zero-padded edges. Output
/// lags input by k samples; finish() drains the tail. Concatenated output
/// equals convert_stream on the whole input.
class StreamingConverter {
public:
    StreamingConverter(double input_rate, const ConversionConfig& cfg)
        : bank_(make_bank(cfg, input_rate)), terms_(cfg.terms) {
        if (cfg.edge != EdgePolicy::zero_pad)
            throw std::invalid_argument("streaming conversion supports zero padding only");
        history_.assign(static_cast<std::size_t>(bank_.half_width()), 0.0);
    }

    std::vector<double> push(std::span<const double> block) {
        std::vector<double> out;
        for (double v : block) {
            if (!(std::abs(v) < 1.0)) throw amplitude_error(consumed_, v);
            ++consumed_;
            emit(v, out);
        }
        return out;
    }

    std::vector<double> finish() {
        std::vector<double> out;
        for (int i = 0; i < bank_.half_width(); ++i) emit(0.0, out);
        return out;
    }

    const PolyphaseBank& bank() const noexcept { return bank_; }

private:
    void emit(double v, std::vector<double>& out) {
        history_.push_back(v);
        if (history_.size() < static_cast<std::size_t>(bank_.length())) return;
        window_.assign(history_.begin(), history_.end());
        const auto block = convert_block(window_, bank_, terms_);
        out.insert(out.end(), block.begin(), block.end());
        history_.pop_front();
    }

    PolyphaseBank bank_;
    int terms_;
    std::deque<double> history_;
    std::vector<double> window_;
    std::size_t consumed_ = 0;
};

}  // namespace natsamp

#endif  // NATSAMP_CONVERTER_HPP
