#ifndef NATSAMP_EXPERIMENT_HPP
#define NATSAMP_EXPERIMENT_HPP

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <map>
#include <json.hpp>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "converter.hpp"
#include "io.hpp"
#include "pwm.hpp"
#include "spectral.hpp"
#include "stirling.hpp"

#ifndef NATSAMP_VERSION
#define NATSAMP_VERSION "0.0.0"
#endif

namespace natsamp {

enum class Algorithm { combined, baseline, algorithm1 };

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::combined: return "combined";
        case Algorithm::baseline: return "baseline";
        case Algorithm::algorithm1: return "algorithm1";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "combined") return Algorithm::combined;
    if (s == "baseline") return Algorithm::baseline;
    if (s == "algorithm1") return Algorithm::algorithm1;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

struct ToneSpec {
    double frequency = 6600.0;
    double amplitude = 0.8;
    double duration = 1.0;
};

struct ExperimentSpec {
    std::optional<std::filesystem::path> input;  ///< otherwise the synthetic tone
    ToneSpec tone;
    double f1 = 44100.0;
    ConversionConfig conversion;
    Algorithm algorithm = Algorithm::combined;
    std::vector<int> k_sweep{1, 2, 3, 4};
    std::optional<int> bits;  ///< quantized PWM; continuous edges otherwise
    double cutoff = 20000.0;
    std::vector<int> harmonic_orders{2, 3};
    int analysis_periods = 8;  ///< coherent tone periods analysed per K
    std::filesystem::path out = "out";

    double output_rate() const {
        return algorithm == Algorithm::algorithm1 ? f1 : f1 * conversion.lup;
    }
};

namespace detail {

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

inline bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v) && v < 9e15; }

}  // namespace detail

/// Tone samples x[n] = A sin(2 pi f (n + 1/2) / f1). With integral f and f1
/// the phase is reduced in integer arithmetic so the sequence is exactly
/// periodic.
inline SampleStream make_tone(const ToneSpec& tone, double f1) {
    if (!(tone.duration > 0.0)) throw std::invalid_argument("tone duration must be positive");
    if (!(std::abs(tone.amplitude) < 1.0)) throw std::domain_error("tone amplitude must be below 1");
    const auto n = static_cast<std::size_t>(std::llround(tone.duration * f1));
    if (n == 0) throw std::invalid_argument("tone is shorter than one sample");
    std::vector<double> x(n);
    if (detail::is_integral(tone.frequency) && detail::is_integral(f1)) {
        const auto f = static_cast<std::int64_t>(tone.frequency);
        const auto den = 2 * static_cast<std::int64_t>(f1);
        for (std::size_t i = 0; i < n; ++i) {
            const std::int64_t num = ((2 * static_cast<std::int64_t>(i) + 1) * f) % den;
            x[i] = tone.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(num) /
                                             static_cast<double>(den));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            x[i] = tone.amplitude *
                   std::sin(2.0 * std::numbers::pi * tone.frequency * (static_cast<double>(i) + 0.5) / f1);
    }
    return SampleStream(f1, std::move(x));
}

inline SampleStream load_input(const ExperimentSpec& spec) {
    SampleStream s = spec.input ? io::load_samples(*spec.input, spec.f1) : make_tone(spec.tone, spec.f1);
    if (s.empty()) throw std::invalid_argument("input has no samples");
    if (std::abs(s.rate() - spec.f1) > 1e-9 * spec.f1)
        throw std::invalid_argument("input rate " + std::to_string(s.rate()) +
                                    " Hz does not match --f1 " + std::to_string(spec.f1) + " Hz");
    return s;
}

/// Converts with the selected algorithm and K.
inline ConversionResult run_algorithm(const SampleStream& input, const ExperimentSpec& spec, int K) {
    auto cfg = spec.conversion;
    cfg.terms = K;
    switch (spec.algorithm) {
        case Algorithm::combined: return convert_stream(input, cfg);
        case Algorithm::baseline: return baseline_convert(input, cfg);
        case Algorithm::algorithm1: {
            auto r = algorithm1_convert(input, K);
            return {std::move(r.output), r.overmodulation, 0.0};
        }
    }
    throw std::logic_error("unreachable");
}

inline nlohmann::ordered_json spec_json(const ExperimentSpec& spec) {
    nlohmann::ordered_json j;
    if (spec.input) j["input"] = spec.input->string();
    else
        j["tone"] = {{"frequency_hz", spec.tone.frequency},
                     {"amplitude", spec.tone.amplitude},
                     {"duration_s", spec.tone.duration}};
    j["f1_hz"] = spec.f1;
    j["lup"] = spec.conversion.lup;
    j["half_width"] = spec.conversion.half_width;
    j["kernel_half_support_periods"] = spec.conversion.kernel_half_support;
    j["edge_policy"] = spec.conversion.edge == EdgePolicy::zero_pad ? "zero_pad" : "extend_edge";
    j["normalize_dc"] = spec.conversion.normalize_dc;
    j["algorithm"] = to_string(spec.algorithm);
    j["k_terms"] = spec.k_sweep;
    if (spec.bits) j["pwm"] = {{"mode", "quantized"}, {"bits", *spec.bits}};
    else j["pwm"] = {{"mode", "continuous"}};
    j["cutoff_hz"] = spec.cutoff;
    j["harmonic_orders"] = spec.harmonic_orders;
    j["analysis_periods"] = spec.analysis_periods;
    return j;
}

/// Data files of one run, written together once everything is computed.
struct RunOutputs {
    std::vector<std::pair<std::string, std::string>> files;  ///< name, content
    nlohmann::ordered_json manifest;

    void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }

    /// Writes data files, then manifest.json with their checksums. The
    /// manifest timestamp is the only non-deterministic byte range.
    void commit(const std::filesystem::path& dir) {
        std::filesystem::create_directories(dir);
        nlohmann::ordered_json sums;
        for (const auto& [name, content] : files) sums[name] = detail::sha256_hex(content);
        manifest["library_version"] = NATSAMP_VERSION;
        manifest["checksums_sha256"] = sums;
        manifest["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));
        for (const auto& [name, content] : files) io::write_atomic(dir / name, content);
        io::write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    }
};

struct ConvertSummary {
    std::size_t input_samples = 0;
    std::size_t output_samples = 0;
    double output_rate = 0.0;
    OvermodulationReport overmodulation;
    double dc_gain_error = 0.0;
};

/// Converts the input with the first K of the sweep and writes
/// converted.csv, diagnostics.json and manifest.json.
inline ConvertSummary run_convert(const ExperimentSpec& spec, RunOutputs* captured = nullptr) {
    if (spec.k_sweep.empty()) throw std::invalid_argument("no K value given");
    const int K = spec.k_sweep.front();
    const auto input = load_input(spec);
    const auto result = run_algorithm(input, spec, K);

    ConvertSummary s{input.size(), result.output.size(), result.output.rate(), result.overmodulation,
                     result.dc_gain_error};

    RunOutputs out;
    out.add("converted.csv", io::stream_csv(result.output));
    nlohmann::ordered_json diag;
    diag["k_terms"] = K;
    diag["input_samples"] = s.input_samples;
    diag["output_samples"] = s.output_samples;
    diag["output_rate_hz"] = s.output_rate;
    diag["overmodulated_samples"] = s.overmodulation.count;
    if (s.overmodulation.count) diag["first_overmodulated_index"] = s.overmodulation.first_index;
    diag["peak_abs_value"] = s.overmodulation.peak;
    diag["dc_gain_error"] = s.dc_gain_error;
    out.add("diagnostics.json", diag.dump(2) + "\n");
    out.manifest["command"] = "convert";
    out.manifest["parameters"] = spec_json(spec);
    out.commit(spec.out);
    if (captured) *captured = std::move(out);
    return s;
}

struct Fig5Row {
    int K = 0;
    std::vector<Harmonic> harmonics;
    double thd = 0.0;
    double fundamental_amplitude = 0.0;
    std::size_t clamped = 0;
    SpectrumReport spectrum;
};

struct AnalysisSegment {
    std::size_t first_input = 0;
    std::size_t input_count = 0;
    bool coherent = false;
};

/// Input-sample range analysed: warm-up of k + 1 samples trimmed at both
/// ends, then as many whole tone periods as fit (up to max_periods) when the
/// tone and rate are integral; otherwise the trimmed range, windowed.
inline AnalysisSegment analysis_segment(std::size_t input_len, const ExperimentSpec& spec) {
    const std::size_t trim = static_cast<std::size_t>(spec.conversion.half_width) + 1;
    if (input_len <= 2 * trim) throw std::invalid_argument("input too short for analysis");
    AnalysisSegment seg{trim, input_len - 2 * trim, false};
    if (!spec.input && detail::is_integral(spec.tone.frequency) && detail::is_integral(spec.f1)) {
        const auto f = static_cast<std::int64_t>(spec.tone.frequency);
        const auto fs = static_cast<std::int64_t>(spec.f1);
        const auto period = static_cast<std::size_t>(fs / std::gcd(f, fs));
        const std::size_t whole = seg.input_count / period;
        if (whole >= 1) {
            seg.input_count = std::min<std::size_t>(whole, static_cast<std::size_t>(spec.analysis_periods)) * period;
            seg.coherent = true;
        }
    }
    return seg;
}

/// Converts, modulates, demodulates and analyses one K.
inline Fig5Row fig5_row(const SampleStream& input, const ExperimentSpec& spec, int K) {
    const auto conv = run_algorithm(input, spec, K);
    const auto seg = analysis_segment(input.size(), spec);
    const auto per_input = static_cast<std::size_t>(std::llround(conv.output.rate() / input.rate()));
    auto first = conv.output.samples().begin() + static_cast<std::ptrdiff_t>(seg.first_input * per_input);
    std::vector<double> values(first, first + static_cast<std::ptrdiff_t>(seg.input_count * per_input));

    Fig5Row row;
    row.K = K;
    row.clamped = clamp_to_unit(values);
    auto wave = uniform_pwm(SampleStream(conv.output.rate(), std::move(values)));

    SampleStream baseband;
    if (spec.bits) {
        wave = quantize(std::move(wave), *spec.bits);
        baseband = demodulate(render_binary(wave, 1 << *spec.bits), spec.cutoff);
    } else {
        baseband = demodulate_pwm(wave, spec.cutoff);
    }
    const auto window = seg.coherent ? AnalysisWindow::rect : AnalysisWindow::blackman_harris;
    row.spectrum = spectrum(baseband, window, spec.tone.frequency);
    analyze_harmonics(row.spectrum, spec.tone.frequency, spec.harmonic_orders);
    row.harmonics = row.spectrum.harmonics;
    row.thd = row.spectrum.thd;
    row.fundamental_amplitude = row.spectrum.fundamental_amplitude;
    return row;
}

inline void check_fig5_spec(const ExperimentSpec& spec) {
    if (spec.input) throw std::invalid_argument("fig5 runs on the synthetic tone only");
    if (spec.k_sweep.empty()) throw std::invalid_argument("no K value given");
    if (spec.harmonic_orders.empty()) throw std::invalid_argument("no harmonic orders given");
    if (spec.analysis_periods < 1) throw std::invalid_argument("analysis_periods must be >= 1");
    for (int h : spec.harmonic_orders) {
        const double f = h * spec.tone.frequency;
        if (f > spec.cutoff)
            throw std::invalid_argument("harmonic " + std::to_string(h) + " at " + io::format_double(f / 1000.0) +
                                        " kHz exceeds the " + io::format_double(spec.cutoff / 1000.0) +
                                        " kHz demodulator cutoff");
    }
}

/// K sweep: for each K, convert -> PWM -> ideal low-pass -> spectrum ->
/// harmonic levels. Writes summary.csv (`K,h2_db,h3_db,thd` for the default
/// orders), summary.json, spectrum_K<K>.csv and manifest.json.
inline std::vector<Fig5Row> run_fig5(const ExperimentSpec& spec, RunOutputs* captured = nullptr) {
    check_fig5_spec(spec);
    const auto input = load_input(spec);

    std::vector<Fig5Row> rows;
    for (int K : spec.k_sweep) rows.push_back(fig5_row(input, spec, K));

    RunOutputs out;
    std::string summary = "K";
    for (int h : spec.harmonic_orders) summary += ",h" + std::to_string(h) + "_db";
    summary += ",thd\n";
    nlohmann::ordered_json js = nlohmann::ordered_json::array();
    std::map<int, std::string> spectra;
    for (const auto& r : rows) {
        summary += std::to_string(r.K);
        nlohmann::ordered_json hj = nlohmann::ordered_json::array();
        for (const auto& h : r.harmonics) {
            summary += ',' + io::format_double(h.level_db);
            hj.push_back({{"order", h.order}, {"frequency_hz", h.frequency}, {"level_db", h.level_db}});
        }
        summary += ',' + io::format_double(r.thd) + '\n';
        js.push_back({{"K", r.K},
                      {"fundamental", {{"frequency_hz", r.spectrum.fundamental_frequency},
                                       {"amplitude", r.fundamental_amplitude}}},
                      {"harmonics", hj},
                      {"thd", r.thd},
                      {"clamped_samples", r.clamped}});

        std::string csv = "frequency_hz,magnitude_db\n";
        for (std::size_t b = 0; b < r.spectrum.magnitude_db.size(); ++b) {
            const double f = r.spectrum.frequency(b);
            if (f > spec.cutoff) break;
            csv += io::format_double(f) + ',' + io::format_double(r.spectrum.magnitude_db[b]) + '\n';
        }
        spectra[r.K] = std::move(csv);
    }
    out.add("summary.csv", summary);
    out.add("summary.json", js.dump(2) + "\n");
    for (auto& [K, csv] : spectra) out.add("spectrum_K" + std::to_string(K) + ".csv", std::move(csv));
    out.manifest["command"] = "fig5";
    out.manifest["parameters"] = spec_json(spec);
    out.commit(spec.out);
    if (captured) *captured = std::move(out);
    return rows;
}

}  // namespace natsamp

#endif  // NATSAMP_EXPERIMENT_HPP
