// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Measurements are printed alongside so a failure can be
// read without rerunning.

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "natsamp/natsamp.hpp"
#include "support.hpp"

using namespace natsamp;
namespace ts = testing_support;

namespace {

constexpr double kF1 = 44100.0;
constexpr double kTone = 6600.0;
constexpr double kAmp = 0.8;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// 1. monomial stencil outputs
Outcome stencils() {
    std::array<double, 7> w1{}, w2{}, w3{};
    for (int n = -3; n <= 3; ++n) {
        w1[n + 3] = n;
        w2[n + 3] = n * n;
        w3[n + 3] = n * n * n;
    }
    const double a = stirling_derivatives(w1).a, b = stirling_derivatives(w2).b, c = stirling_derivatives(w3).c;
    const double worst = std::max({std::abs(a - 0.5), std::abs(b - 0.25), std::abs(c - 0.125)});
    return {worst <= 1e-14, "a=" + fmt(a) + " b=" + fmt(b) + " c=" + fmt(c) + " max dev " + fmt(worst)};
}

// 2. combiner against the 4-term series on random derivative tuples
Outcome combiner() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double T = 1.0 / (8 * kF1);
    const double wmax = 2 * ts::pi * 22050.0;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double w = wmax * std::abs(unit(rng));
        const double d[4] = {0.99 * unit(rng), w * unit(rng), w * w * unit(rng), w * w * w * unit(rng)};
        const NatBlock blk(d[0], T / 2 * d[1], T * T / 8 * d[2], T * T * T / 48 * d[3]);
        worst = std::max(worst, std::abs(natural_sample(blk, 4) - series_from_derivatives(d, T, 4)));
    }
    return {worst <= 1e-12, "max |combiner - series| = " + fmt(worst) + " over 1000 tuples"};
}

// 3. fitted-curve evaluation against the shifted-kernel convolution
Outcome theorem2() {
    const Kernel kernel(1.0 / kF1);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst = 0.0;
    std::vector<double> w(9);
    for (int i = 0; i < 10000; ++i) {
        for (auto& v : w) v = unit(rng);
        const auto r = theorem2_check(w, 0.5 * unit(rng) / kF1, kernel);
        worst = std::max(worst, std::abs(r.method1 - r.method2));
    }
    return {worst <= 1e-12, "max |method1 - method2| = " + fmt(worst) + " over 10000 trials"};
}

// 4. polyphase linear stage against zero insertion + full-rate FIR
Outcome polyphase() {
    const auto x = ts::uniform_noise(10000, 0.99, 4);
    const ConversionConfig cfg;
    const auto lin = linear_stage(x, make_bank(cfg, kF1));
    const std::vector<double>* outs[4] = {&lin.s, &lin.a, &lin.b, &lin.c};
    double worst = 0.0;
    for (int l = 0; l <= 3; ++l) {
        const auto direct = direct_form_stage(x, make_kernel(cfg, kF1), cfg.lup, l);
        for (std::size_t m = 0; m < direct.size(); ++m) worst = std::max(worst, std::abs(direct[m] - (*outs[l])[m]));
    }
    return {worst <= 1e-12, "max per-sample difference (orders 0-3, 80000 outputs) = " + fmt(worst)};
}

// Shared setup for criteria 5 and 7: one second of the test tone and the
// natural samples of two reference curves, found by root finding.
struct OracleSetup {
    SampleStream input;
    std::vector<double> analytic;  // the sinusoid itself
    std::vector<double> fitted;    // the curve the interpolator fits through the samples
    std::size_t first = 0, last = 0;

    OracleSetup() : input(make_tone({kTone, kAmp, 1.0}, kF1)) {
        const ConversionConfig cfg;
        const double T2 = 1.0 / (cfg.lup * kF1);
        const std::size_t n = input.size() * static_cast<std::size_t>(cfg.lup);
        const auto sig = AnalyticSignal::tone(kAmp, kTone);
        const FittedCurve curve(input.samples(), make_kernel(cfg, kF1));
        analytic.resize(n);
        fitted.resize(n);
        for (std::size_t m = 0; m < n; ++m) {
            analytic[m] = root_find_natural(sig, T2, static_cast<std::int64_t>(m));
            fitted[m] = root_find_natural(curve, T2, static_cast<std::int64_t>(m));
        }
        // outputs whose window reaches past the ends see zero padding
        first = static_cast<std::size_t>((cfg.half_width + 1) * cfg.lup);
        last = n - first;
    }

    double rms(const SampleStream& out, const std::vector<double>& ref) const {
        return ts::rms_difference(out.samples(), ref, first, last);
    }
};

Outcome convergence(const OracleSetup& o) {
    bool pass = true;
    std::string detail;
    for (const auto* ref : {&o.analytic, &o.fitted}) {
        double e[5];
        for (int K = 1; K <= 4; ++K) {
            ConversionConfig cfg;
            cfg.terms = K;
            e[K] = o.rms(convert_stream(o.input, cfg).output, *ref);
        }
        bool monotone = true;
        for (int K = 2; K <= 4; ++K) monotone = monotone && e[K] <= e[K - 1];
        const bool ratio = e[4] <= 0.1 * e[1];
        pass = pass && monotone && ratio;
        detail += std::string(ref == &o.analytic ? "sinusoid" : "fitted curve") + " RMS K1..4 = " + fmt(e[1]) +
                  ", " + fmt(e[2]) + ", " + fmt(e[3]) + ", " + fmt(e[4]) + " (K4/K1 " + fmt(e[4] / e[1]) +
                  (monotone ? "" : ", NOT monotone") + "); ";
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

Outcome fig5_trend() {
    ExperimentSpec spec;
    spec.out = ts::scratch_dir("acceptance_fig5");
    const auto rows = run_fig5(spec);
    bool drop = true, steps = true;
    std::string detail;
    for (std::size_t h = 0; h < 2; ++h) {
        const double first = rows.front().harmonics[h].level_db, last = rows.back().harmonics[h].level_db;
        drop = drop && last <= first - 10.0;
        detail += "h" + std::to_string(h + 2) + " dB:";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            detail += " " + fmt(rows[i].harmonics[h].level_db);
            if (i > 0) {
                const double rise = rows[i].harmonics[h].level_db - rows[i - 1].harmonics[h].level_db;
                if (rise > 1.0) {
                    steps = false;
                    detail += " (+" + fmt(rise) + " dB at K=" + std::to_string(rows[i].K) + ")";
                }
            }
        }
        detail += "; ";
    }
    detail += std::string("K4 at least 10 dB below K1: ") + (drop ? "yes" : "no") +
              "; no K-step rise over 1 dB: " + (steps ? "yes" : "no");
    return {drop && steps, detail};
}

Outcome accuracy_vs_baseline(const OracleSetup& o) {
    ConversionConfig cfg;
    const auto combined = convert_stream(o.input, cfg).output;
    const auto baseline = baseline_convert(o.input, cfg).output;
    bool pass = true;
    std::string detail;
    for (const auto* ref : {&o.analytic, &o.fitted}) {
        const double ec = o.rms(combined, *ref), eb = o.rms(baseline, *ref);
        pass = pass && ec <= eb;
        detail += std::string(ref == &o.analytic ? "sinusoid" : "fitted curve") + ": combined " + fmt(ec, 10) +
                  " vs baseline " + fmt(eb, 10) + "; ";
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

// 8. exact natural PWM versus uniform PWM of the tone, both demodulated
Outcome pwm_sanity() {
    const double fc = 8 * kF1, T = 1.0 / fc, cutoff = 20000.0;
    const std::size_t periods = 1176 * 8;  // eight tone periods
    const auto sig = AnalyticSignal::tone(kAmp, kTone);
    std::vector<double> natural(periods), uniform(periods);
    for (std::size_t k = 0; k < periods; ++k) {
        natural[k] = root_find_natural(sig, T, static_cast<std::int64_t>(k));
        uniform[k] = sig((k + 0.5) * T);
    }
    auto analyse = [&](const std::vector<double>& x) {
        return spectrum(demodulate_pwm(uniform_pwm(SampleStream(fc, x)), cutoff), AnalysisWindow::rect, kTone);
    };
    const auto nat = analyse(natural);
    double worst_natural = db_floor;
    const auto fund = static_cast<std::size_t>(std::llround(kTone / nat.bin_resolution));
    for (std::size_t k = 0; k < nat.magnitude_db.size() && nat.frequency(k) <= cutoff; ++k)
        if (k != fund) worst_natural = std::max(worst_natural, nat.magnitude_db[k]);

    const auto uni = analyse(uniform);
    const std::vector<int> orders{2, 3};
    const auto levels = harmonic_levels(uni, kTone, orders);
    const double strongest_uniform = std::max(levels[0], levels[1]);
    const bool pass = worst_natural <= -60.0 && strongest_uniform >= worst_natural + 20.0;
    return {pass, "natural PWM worst in-band line " + fmt(worst_natural) + " dB; uniform PWM h2 " + fmt(levels[0]) +
                      " dB, h3 " + fmt(levels[1]) + " dB"};
}

// 9. the CLI run twice on the same specs gives byte-identical data files
Outcome determinism() {
    const auto root = ts::scratch_dir("acceptance_cli");
    const std::string cli = NATSAMP_CLI;
    struct Run {
        std::string args;
        std::vector<std::string> files;
    };
    const std::vector<Run> runs{
        {"convert --tone 6600,0.8,1 --k-terms 4", {"converted.csv", "diagnostics.json"}},
        {"convert --algorithm baseline --tone 6600,0.8,0.2", {"converted.csv", "diagnostics.json"}},
        {"fig5", {"summary.csv", "summary.json", "spectrum_K1.csv", "spectrum_K4.csv"}},
        {"fig5 --bits 8 --k-terms 1,4 --tone 6600,0.8,0.1", {"summary.csv", "spectrum_K4.csv"}},
    };
    bool pass = true;
    std::size_t compared = 0;
    std::string detail;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        std::string out[2];
        for (int rep = 0; rep < 2; ++rep) {
            out[rep] = (root / ("run" + std::to_string(r) + "_" + std::to_string(rep))).string();
            const std::string cmd = "\"" + cli + "\" " + runs[r].args + " --out \"" + out[rep] + "\" > /dev/null";
            if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
        }
        for (const auto& f : runs[r].files) {
            ++compared;
            if (io::read_file(std::filesystem::path(out[0]) / f) != io::read_file(std::filesystem::path(out[1]) / f)) {
                pass = false;
                detail += "differs: run " + std::to_string(r) + " " + f + "; ";
            }
        }
        auto m0 = nlohmann::json::parse(io::read_file(std::filesystem::path(out[0]) / "manifest.json"));
        auto m1 = nlohmann::json::parse(io::read_file(std::filesystem::path(out[1]) / "manifest.json"));
        m0.erase("timestamp");
        m1.erase("timestamp");
        ++compared;
        if (m0 != m1) {
            pass = false;
            detail += "manifest differs beyond its timestamp: run " + std::to_string(r) + "; ";
        }
    }
    for (int rep = 0; rep < 2; ++rep) {
        const auto path = (root / ("bank" + std::to_string(rep) + ".csv")).string();
        const std::string cmd = "\"" + cli + "\" dump-bank --csv --out \"" + path + "\"";
        if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
    }
    ++compared;
    if (io::read_file(root / "bank0.csv") != io::read_file(root / "bank1.csv")) {
        pass = false;
        detail += "bank dump differs; ";
    }
    return {pass, detail.empty() ? std::to_string(compared) + " file pairs identical across 5 CLI specs" : detail};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const std::string& name, const std::function<Outcome()>& run) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << "  " << name << "  [" << o.detail << "]  ("
                  << fmt(secs) << " s)" << std::endl;
    };

    report(1, "stencil exactness on monomials", stencils);
    report(2, "combiner equals 4-term series", combiner);
    report(3, "curve evaluation equals shifted-kernel convolution", theorem2);
    report(4, "polyphase equals direct form", polyphase);

    const auto setup_start = std::chrono::steady_clock::now();
    const OracleSetup oracle;
    std::cout << "      (root-finding references for 352800 carrier periods: "
              << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - setup_start).count()) << " s)"
              << std::endl;
    report(5, "oracle convergence in K", [&] { return convergence(oracle); });
    report(6, "harmonic levels fall with K", fig5_trend);
    report(7, "combined pipeline at least as accurate as baseline", [&] { return accuracy_vs_baseline(oracle); });
    report(8, "PWM demodulation sanity", pwm_sanity);
    report(9, "CLI determinism", determinism);

    std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}
