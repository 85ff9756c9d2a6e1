#ifndef NATSAMP_IO_HPP
#define NATSAMP_IO_HPP

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kernel.hpp"
#include "signal.hpp"

namespace natsamp::io {

class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to a sibling temp file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, std::string_view data) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string format_double(double v) {
    std::string s;
    natsamp::detail::append_double(s, v);
    return s;
}

/// `index,value` rows with a header.
inline std::string stream_csv(const SampleStream& s) {
    std::string out = "index,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(s[i]);
        out += '\n';
    }
    return out;
}

/// `time,value` rows, time in seconds from the first sample.
inline std::string timed_csv(const SampleStream& s) {
    std::string out = "time,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_double(static_cast<double>(i) / s.rate());
        out += ',';
        out += format_double(s[i]);
        out += '\n';
    }
    return out;
}

/// Samples from CSV text: one value per line, or `index,value` rows (the
/// last column is taken). A non-numeric first line is treated as a header.
inline std::vector<double> parse_samples_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> values;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto comma = line.rfind(',');
        std::string_view field = comma == std::string::npos
                                     ? std::string_view(line).substr(first)
                                     : std::string_view(line).substr(comma + 1);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        try {
            values.push_back(natsamp::detail::parse_double(field));
        } catch (const std::invalid_argument&) {
            if (values.empty() && line_no == 1) continue;  // header
            throw format_error("line " + std::to_string(line_no) + ": malformed sample '" +
                               std::string(field) + "'");
        }
    }
    return values;
}

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put_le32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}
inline void put_le16(std::string& s, std::uint16_t v) {
    s += static_cast<char>(v & 0xff);
    s += static_cast<char>((v >> 8) & 0xff);
}

}  // namespace detail

/// 16- or 24-bit PCM mono WAV, normalized by full scale (2^15 or 2^23).
inline SampleStream parse_wav(const std::string& bytes) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();
    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        throw format_error("not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;
    for (std::size_t pos = 12; pos + 8 <= n;) {
        const std::uint32_t size = detail::le32(p + pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > n) throw format_error("truncated chunk at byte " + std::to_string(pos));
        if (std::memcmp(p + pos, "fmt ", 4) == 0) {
            if (size < 16) throw format_error("fmt chunk too short");
            format = detail::le16(p + body);
            channels = detail::le16(p + body + 2);
            rate = detail::le32(p + body + 4);
            bits = detail::le16(p + body + 14);
        } else if (std::memcmp(p + pos, "data", 4) == 0) {
            data = p + body;
            data_size = size;
        }
        pos = body + size + (size & 1);
    }
    if (format != 1) throw format_error("only PCM WAV is supported");
    if (channels != 1) throw format_error("only mono WAV is supported");
    if (bits != 16 && bits != 24) throw format_error("only 16- or 24-bit WAV is supported");
    if (!data) throw format_error("missing data chunk");

    const std::size_t width = bits / 8;
    const double full_scale = bits == 16 ? 32768.0 : 8388608.0;
    std::vector<double> samples(data_size / width);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const unsigned char* s = data + i * width;
        std::int32_t v = 0;
        if (bits == 16) {
            v = static_cast<std::int16_t>(detail::le16(s));
        } else {
            v = static_cast<std::int32_t>(s[0] | (s[1] << 8) | (s[2] << 16));
            if (v & 0x800000) v -= 0x1000000;
        }
        samples[i] = v / full_scale;
    }
    return SampleStream(static_cast<double>(rate), std::move(samples));
}

/// 16-bit PCM mono WAV. Values are clipped to [-1, 1) and requantized.
inline std::string wav16(const SampleStream& s) {
    std::string out;
    const auto data_bytes = static_cast<std::uint32_t>(s.size() * 2);
    const auto rate = static_cast<std::uint32_t>(std::lround(s.rate()));
    out += "RIFF";
    detail::put_le32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    detail::put_le32(out, 16);
    detail::put_le16(out, 1);
    detail::put_le16(out, 1);
    detail::put_le32(out, rate);
    detail::put_le32(out, rate * 2);
    detail::put_le16(out, 2);
    detail::put_le16(out, 16);
    out += "data";
    detail::put_le32(out, data_bytes);
    for (double v : s.samples()) {
        const double q = std::nearbyint(std::clamp(v, -1.0, 1.0) * 32768.0);
        detail::put_le16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0))));
    }
    return out;
}

/// Loads a sample file by extension (.wav, otherwise CSV). CSV input needs
/// the sample rate from the caller.
inline SampleStream load_samples(const std::filesystem::path& path, double csv_rate) {
    const auto bytes = read_file(path);
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") return parse_wav(bytes);
    return SampleStream(csv_rate, parse_samples_csv(bytes));
}

}  // namespace natsamp::io

#endif  // NATSAMP_IO_HPP
