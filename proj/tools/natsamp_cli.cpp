// natsamp: natural-sampling conversion and harmonic-sweep experiments.
//
//   natsamp convert   --tone 6600,0.8,1 --k-terms 4 --out run/
//   natsamp fig5      --k-terms 1,2,3,4 --out fig5/
//   natsamp dump-bank [--csv] [--out bank.txt]

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "natsamp/natsamp.hpp"

namespace {

natsamp::ToneSpec parse_tone(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) v.push_back(natsamp::detail::parse_double(field));
    if (v.size() != 3) throw std::invalid_argument("--tone expects f,amp,dur");
    return {v[0], v[1], v[2]};
}

int fail(const std::string& kind, const std::string& message) {
    nlohmann::ordered_json j{{"status", "error"}, {"kind", kind}, {"message", message}};
    std::cerr << j.dump() << '\n';
    return 1;
}

struct Options {
    std::string tone = "6600,0.8,1";
    std::string input;
    std::string algorithm = "combined";
    std::string edge = "zero_pad";
    std::vector<int> k_terms;
    int bits = 0;
    std::vector<int> harmonics{2, 3};
};

void add_common(CLI::App* cmd, natsamp::ExperimentSpec& spec, Options& o) {
    cmd->add_option("--f1", spec.f1, "input sample rate, Hz")->capture_default_str();
    cmd->add_option("--lup", spec.conversion.lup, "upsampling factor")->capture_default_str();
    cmd->add_option("--half-width", spec.conversion.half_width, "taps each side of the centre sample")
        ->capture_default_str();
    cmd->add_option("--kernel-support", spec.conversion.kernel_half_support,
                    "kernel half support in input periods")
        ->capture_default_str();
    cmd->add_flag("--normalize-dc", spec.conversion.normalize_dc, "scale each phase to unit DC gain");
    cmd->add_option("--edge", o.edge, "zero_pad | extend_edge")->capture_default_str();
    cmd->add_option("--algorithm", o.algorithm, "combined | baseline | algorithm1")->capture_default_str();
    cmd->add_option("--tone", o.tone, "synthetic tone f,amp,dur (Hz, peak, s)")->capture_default_str();
    cmd->add_option("--input", o.input, "CSV or WAV input (overrides --tone)");
    cmd->add_option("--out", spec.out, "output directory")->capture_default_str();
}

void resolve(natsamp::ExperimentSpec& spec, const Options& o, std::vector<int> default_k) {
    spec.tone = parse_tone(o.tone);
    if (!o.input.empty()) spec.input = o.input;
    spec.algorithm = natsamp::parse_algorithm(o.algorithm);
    if (o.edge == "zero_pad") spec.conversion.edge = natsamp::EdgePolicy::zero_pad;
    else if (o.edge == "extend_edge") spec.conversion.edge = natsamp::EdgePolicy::extend_edge;
    else throw std::invalid_argument("unknown edge policy '" + o.edge + "'");
    spec.k_sweep = o.k_terms.empty() ? std::move(default_k) : o.k_terms;
    if (o.bits) spec.bits = o.bits;
    spec.harmonic_orders = o.harmonics;
    spec.conversion.validate();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Natural-sampling conversion for digital PWM"};
    app.set_version_flag("--version", std::string(NATSAMP_VERSION));
    app.require_subcommand(1);

    natsamp::ExperimentSpec spec;
    Options o;

    auto* convert = app.add_subcommand("convert", "convert a stream to natural samples");
    add_common(convert, spec, o);
    convert->add_option("--k-terms", o.k_terms, "series terms K (1..4)")->expected(1);

    auto* fig5 = app.add_subcommand("fig5", "harmonic levels of demodulated PWM versus K");
    add_common(fig5, spec, o);
    fig5->add_option("--k-terms", o.k_terms, "K sweep, comma separated")->delimiter(',');
    fig5->add_option("--bits", o.bits, "quantize pulse widths to B bits (continuous edges if omitted)");
    fig5->add_option("--cutoff", spec.cutoff, "demodulator cutoff, Hz")->capture_default_str();
    fig5->add_option("--harmonics", o.harmonics, "harmonic orders")->delimiter(',');
    fig5->add_option("--analysis-periods", spec.analysis_periods, "tone periods analysed per K")
        ->capture_default_str();

    bool csv = false;
    std::string bank_out;
    auto* dump = app.add_subcommand("dump-bank", "print the polyphase coefficient table");
    dump->add_option("--f1", spec.f1, "input sample rate, Hz")->capture_default_str();
    dump->add_option("--lup", spec.conversion.lup, "upsampling factor")->capture_default_str();
    dump->add_option("--half-width", spec.conversion.half_width)->capture_default_str();
    dump->add_option("--kernel-support", spec.conversion.kernel_half_support)->capture_default_str();
    dump->add_flag("--normalize-dc", spec.conversion.normalize_dc);
    dump->add_flag("--csv", csv, "CSV with a phase,order,index,value header");
    dump->add_option("--out", bank_out, "output file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        if (*dump) {
            spec.conversion.validate();
            const auto bank = natsamp::make_bank(spec.conversion, spec.f1);
            const auto text = csv ? natsamp::export_bank_csv(bank) : natsamp::dump_bank(bank);
            if (bank_out.empty()) std::cout << text;
            else natsamp::io::write_atomic(bank_out, text);
        } else if (*convert) {
            resolve(spec, o, {natsamp::max_terms});
            const auto s = natsamp::run_convert(spec);
            std::cout << "converted " << s.input_samples << " samples to " << s.output_samples << " at "
                      << s.output_rate << " Hz";
            if (s.overmodulation.count)
                std::cout << "; " << s.overmodulation.count << " overmodulated (first at "
                          << s.overmodulation.first_index << ")";
            std::cout << '\n';
        } else {
            resolve(spec, o, {1, 2, 3, 4});
            const auto rows = natsamp::run_fig5(spec);
            for (const auto& r : rows) {
                std::cout << "K=" << r.K;
                for (const auto& h : r.harmonics) std::cout << "  h" << h.order << " " << h.level_db << " dB";
                std::cout << "  thd " << r.thd << '\n';
            }
        }
    } catch (const natsamp::io::format_error& e) {
        return fail("format", e.what());
    } catch (const std::domain_error& e) {
        return fail("domain", e.what());
    } catch (const std::invalid_argument& e) {
        return fail("invalid_argument", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return 0;
}
