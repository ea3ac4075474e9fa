#ifndef G2HBT_IO_HPP
#define G2HBT_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "g2hbt/errors.hpp"
#include "g2hbt/estimator.hpp"
#include "g2hbt/signal.hpp"

// File surfaces: the G2TS binary record format, CSV emitters, the flat
// [section] key = value config format, and JSON summaries. All numeric text
// is written with %.17g so outputs round-trip and re-runs are byte-identical.

namespace g2hbt {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// G2TS binary time-series format, little-endian:
//   bytes 0-3   magic "G2TS"
//   bytes 4-5   version (u16, currently 1)
//   byte  6     arm label ('b' or 'c')
//   byte  7     quadrature label ('+' or '-')
//   bytes 8-11  sample count (u32)
//   bytes 12-19 sample rate (f64)
//   then count * f64 samples
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
inline void put_le(std::string& out, T v) {
    for (size_t i = 0; i < sizeof(T); ++i) out.push_back(char((uint64_t(v) >> (8 * i)) & 0xFF));
}

inline void put_le_f64(std::string& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_le(out, bits);
}

template <typename T>
inline T get_le(const char* p) {
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= uint64_t(uint8_t(p[i])) << (8 * i);
    return T(v);
}

inline double get_le_f64(const char* p) {
    const uint64_t bits = get_le<uint64_t>(p);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace detail

inline constexpr uint16_t kG2tsVersion = 1;

inline void write_g2ts(const std::filesystem::path& path, const TimeSeries& series) {
    std::string out;
    out.reserve(20 + series.samples.size() * 8);
    out += "G2TS";
    detail::put_le<uint16_t>(out, kG2tsVersion);
    out.push_back(series.arm);
    out.push_back(series.quadrature);
    detail::put_le<uint32_t>(out, uint32_t(series.samples.size()));
    detail::put_le_f64(out, series.sample_rate);
    for (double x : series.samples) detail::put_le_f64(out, x);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f.write(out.data(), std::streamsize(out.size()));
}

inline TimeSeries read_g2ts(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (data.size() < 20 || data.compare(0, 4, "G2TS") != 0)
        throw std::runtime_error(path.string() + ": not a G2TS file");
    const uint16_t version = detail::get_le<uint16_t>(data.data() + 4);
    if (version != kG2tsVersion)
        throw std::runtime_error(path.string() + ": unsupported G2TS version");
    TimeSeries ts;
    ts.arm = data[6];
    ts.quadrature = data[7];
    const uint32_t count = detail::get_le<uint32_t>(data.data() + 8);
    ts.sample_rate = detail::get_le_f64(data.data() + 12);
    if (data.size() != 20 + size_t(count) * 8)
        throw std::runtime_error(path.string() + ": truncated G2TS payload");
    ts.samples.resize(count);
    for (uint32_t i = 0; i < count; ++i)
        ts.samples[i] = detail::get_le_f64(data.data() + 20 + size_t(i) * 8);
    ts.validate();
    return ts;
}

// ---------------------------------------------------------------------------
// Flat config format: [section] lines and key = value pairs, '#' comments.
// Unknown keys are rejected by consumers (ScenarioConfig invariant).
// ---------------------------------------------------------------------------

using ConfigMap = std::map<std::string, std::string>; // keys "section.key"

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline ConfigMap parse_config_text(std::istream& in) {
    ConfigMap cfg;
    std::string line, section;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') line = line.substr(1); // embedded-provenance form
        line = trim(line);
        if (line.empty() || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected 'key = value', got: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key");
        cfg[section.empty() ? key : section + "." + key] = val;
    }
    return cfg;
}

inline ConfigMap read_config_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read config " + path.string());
    return parse_config_text(f);
}

// Serialize grouped by section, keys sorted (std::map order) for stable bytes.
inline std::string config_to_text(const ConfigMap& cfg) {
    std::ostringstream out;
    std::string current_section;
    bool first = true;
    for (const auto& [full_key, value] : cfg) {
        const auto dot = full_key.find('.');
        const std::string section = dot == std::string::npos ? "" : full_key.substr(0, dot);
        const std::string key = dot == std::string::npos ? full_key : full_key.substr(dot + 1);
        if (section != current_section) {
            if (!first) out << "\n";
            out << "[" << section << "]\n";
            current_section = section;
        }
        out << key << " = " << value << "\n";
        first = false;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// CSV emitters. Provenance: the fully resolved config is embedded as '#'
// comment lines, parseable by parse_config_text.
// ---------------------------------------------------------------------------

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f.write(content.data(), std::streamsize(content.size()));
}

inline std::string provenance_comment(const ConfigMap& cfg) {
    std::istringstream lines(config_to_text(cfg));
    std::string out, line;
    while (std::getline(lines, line)) out += "# " + line + "\n";
    return out;
}

inline std::string g2curve_csv(const G2Curve& curve, const ConfigMap& provenance) {
    std::string out = provenance_comment(provenance);
    out += "tau_omega,g2,ci68_low,ci68_high,n_samples,n_runs\n";
    for (const auto& pt : curve.points) {
        out += fmt_double(pt.tau_omega) + "," + fmt_double(pt.g2) + "," +
               fmt_double(pt.ci68_low) + "," + fmt_double(pt.ci68_high) + "," +
               std::to_string(curve.n_samples) + "," + std::to_string(curve.n_runs) + "\n";
    }
    return out;
}

inline std::string dataset_run_csv(const TimeSeries& h1, const TimeSeries& h2) {
    std::string out = "index,h1,h2\n";
    for (size_t i = 0; i < h1.samples.size(); ++i)
        out += std::to_string(i) + "," + fmt_double(h1.samples[i]) + "," +
               fmt_double(h2.samples[i]) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Summary JSON
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json state_json(const GaussianState& s) {
    return {{"v_plus", s.v_plus}, {"v_minus", s.v_minus}, {"alpha", s.alpha}};
}

inline nlohmann::ordered_json summary_json(const G2Curve& curve, double analytic_g2,
                                           const std::string& curve_file,
                                           const ConfigMap& provenance) {
    nlohmann::ordered_json j;
    j["state"] = state_json(curve.state);
    j["eta"] = curve.eta;
    j["seed"] = curve.seed;
    j["g2_at_zero"] = curve.points.empty() ? nullptr : nlohmann::ordered_json(curve.points.front().g2);
    if (!curve.points.empty())
        j["ci68"] = {curve.points.front().ci68_low, curve.points.front().ci68_high};
    else
        j["ci68"] = nullptr;
    j["analytic_g2"] = analytic_g2;
    j["curve_file"] = curve_file;
    if (!curve.warnings.empty()) j["warnings"] = curve.warnings;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : provenance) cfg[k] = v;
    j["config"] = cfg;
    return j;
}

} // namespace g2hbt

#endif
