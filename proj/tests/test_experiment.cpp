#include <gtest/gtest.h>

#include "natsamp/experiment.hpp"
#include "support.hpp"

using namespace natsamp;
namespace ts = testing_support;

namespace {

ExperimentSpec short_tone(const std::string& name) {
    ExperimentSpec spec;
    spec.tone.duration = 0.05;
    spec.out = ts::scratch_dir(name) / "out";
    return spec;
}

}  // namespace

TEST(Tone, ExactlyPeriodic) {
    const auto s = make_tone({6600.0, 0.8, 0.1}, 44100.0);
    ASSERT_EQ(s.size(), 4410u);
    for (std::size_t i = 0; i + 147 < s.size(); ++i) EXPECT_EQ(s[i], s[i + 147]) << i;
    const auto direct = ts::tone(4410, 0.8, 6600.0, 44100.0);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], direct[i], 1e-12);
    EXPECT_THROW(make_tone({6600.0, 1.0, 0.1}, 44100.0), std::domain_error);
    EXPECT_THROW(make_tone({6600.0, 0.5, 0.0}, 44100.0), std::invalid_argument);
}

TEST(RunConvert, WritesOutputsAndManifest) {
    auto spec = short_tone("convert");
    RunOutputs files;
    const auto s = run_convert(spec, &files);
    EXPECT_EQ(s.input_samples, 2205u);
    EXPECT_EQ(s.output_samples, 17640u);
    for (const char* f : {"converted.csv", "diagnostics.json", "manifest.json"})
        EXPECT_TRUE(std::filesystem::exists(spec.out / f)) << f;
    const auto manifest = nlohmann::json::parse(io::read_file(spec.out / "manifest.json"));
    EXPECT_EQ(manifest["parameters"]["lup"], 8);
    EXPECT_EQ(manifest["parameters"]["algorithm"], "combined");
    EXPECT_EQ(manifest["library_version"], NATSAMP_VERSION);
    EXPECT_EQ(manifest["checksums_sha256"]["converted.csv"],
              detail::sha256_hex(io::read_file(spec.out / "converted.csv")));
}

TEST(RunConvert, SameSpecSameBytes) {
    auto a = short_tone("det_a"), b = short_tone("det_b");
    run_convert(a);
    run_convert(b);
    for (const char* f : {"converted.csv", "diagnostics.json"})
        EXPECT_EQ(io::read_file(a.out / f), io::read_file(b.out / f)) << f;
    auto ma = nlohmann::json::parse(io::read_file(a.out / "manifest.json"));
    auto mb = nlohmann::json::parse(io::read_file(b.out / "manifest.json"));
    ma.erase("timestamp");
    mb.erase("timestamp");
    EXPECT_EQ(ma, mb);
}

TEST(RunConvert, EmptyInputLeavesNoOutputs) {
    auto spec = short_tone("empty");
    const auto input = spec.out.parent_path() / "empty.csv";
    io::write_atomic(input, "index,value\n");
    spec.input = input;
    EXPECT_THROW(run_convert(spec), std::invalid_argument);
    EXPECT_FALSE(std::filesystem::exists(spec.out));
}

TEST(RunConvert, BadInputReportsLine) {
    auto spec = short_tone("badcsv");
    const auto input = spec.out.parent_path() / "bad.csv";
    io::write_atomic(input, "0.1\n0.2\n0.3x\n");
    spec.input = input;
    try {
        run_convert(spec);
        FAIL();
    } catch (const io::format_error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    EXPECT_FALSE(std::filesystem::exists(spec.out));
}

TEST(RunConvert, AllAlgorithms) {
    for (auto alg : {Algorithm::combined, Algorithm::baseline, Algorithm::algorithm1}) {
        auto spec = short_tone("alg");
        spec.algorithm = alg;
        const auto s = run_convert(spec);
        EXPECT_EQ(s.output_samples, alg == Algorithm::algorithm1 ? 2205u : 17640u) << to_string(alg);
    }
    EXPECT_THROW(parse_algorithm("fancy"), std::invalid_argument);
}

TEST(RunFig5, RepeatedKGivesIdenticalRows) {
    auto spec = short_tone("fig5_repeat");
    spec.k_sweep = {1, 1};
    const auto rows = run_fig5(spec);
    ASSERT_EQ(rows.size(), 2u);
    for (std::size_t h = 0; h < rows[0].harmonics.size(); ++h)
        EXPECT_EQ(rows[0].harmonics[h].level_db, rows[1].harmonics[h].level_db);
    const auto csv = io::read_file(spec.out / "summary.csv");
    const auto first = csv.find('\n') + 1, second = csv.find('\n', first) + 1;
    EXPECT_EQ(csv.substr(first, second - first), csv.substr(second, csv.find('\n', second) + 1 - second));
}

TEST(RunFig5, DefaultSweepReducesSecondHarmonic) {
    auto spec = short_tone("fig5_default");
    const auto rows = run_fig5(spec);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_LE(rows[i].harmonics[0].level_db, rows[i - 1].harmonics[0].level_db) << rows[i].K;
    const auto csv = io::read_file(spec.out / "summary.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "K,h2_db,h3_db,thd");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    const auto spectrum_csv = io::read_file(spec.out / "spectrum_K4.csv");
    EXPECT_EQ(spectrum_csv.substr(0, spectrum_csv.find('\n')), "frequency_hz,magnitude_db");
}

TEST(RunFig5, HarmonicAboveCutoffIsRejected) {
    auto spec = short_tone("fig5_9k");
    spec.tone.frequency = 9000.0;
    try {
        run_fig5(spec);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("harmonic 3 at 27 kHz exceeds the 20 kHz"), std::string::npos)
            << e.what();
    }
    EXPECT_FALSE(std::filesystem::exists(spec.out));
}

TEST(RunFig5, QuantizedWidths) {
    auto spec = short_tone("fig5_bits");
    spec.bits = 8;
    spec.k_sweep = {1, 4};
    const auto rows = run_fig5(spec);
    // 8-bit edges dominate: the K=4 correction cannot beat the quantizer
    EXPECT_GT(rows[1].harmonics[0].level_db, -126.0);
    EXPECT_LT(rows[1].harmonics[0].level_db, rows[0].harmonics[0].level_db);
}
