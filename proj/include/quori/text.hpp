#pragma once

// Small text helpers shared by the config, CSV and log writers.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace quori::text {

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_lines(std::string_view doc) {
    std::vector<std::string_view> out;
    size_t pos = 0;
    while (pos <= doc.size()) {
        auto nl = doc.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < doc.size()) out.push_back(doc.substr(pos));
            break;
        }
        auto line = doc.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        pos = nl + 1;
    }
    return out;
}

// Plain comma split with per-field trimming. No quoting: none of our
// file formats carry commas inside fields.
inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    size_t pos = 0;
    while (true) {
        auto c = line.find(',', pos);
        out.push_back(trim(line.substr(pos, c == std::string_view::npos ? c : c - pos)));
        if (c == std::string_view::npos) break;
        pos = c + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    long long v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

// Nine significant digits: enough to be stable, short enough to diff.
inline std::string fmt9(double v) {
    if (v == 0.0) v = 0.0;  // drop negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Round-trip exact.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Shortest %g rendering of `shown` that reloads, through `to_internal`, to
// exactly `stored`. Falls back to neighbouring doubles when the conversion
// is not exactly invertible.
template <class F>
std::string fmt_roundtrip(double stored, double shown, F to_internal) {
    char buf[40];
    int first = 1;
    if (std::isfinite(shown) && std::abs(shown) >= 1.0)
        first = std::min(17, static_cast<int>(std::floor(std::log10(std::abs(shown)))) + 1);
    for (int prec = first; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, shown);
        auto back = parse_double(buf);
        if (back && to_internal(*back) == stored) return buf;
    }
    double lo = shown, hi = shown;
    for (int i = 0; i < 16; ++i) {
        lo = std::nextafter(lo, -INFINITY);
        hi = std::nextafter(hi, INFINITY);
        if (to_internal(lo) == stored) return fmt17(lo);
        if (to_internal(hi) == stored) return fmt17(hi);
    }
    return fmt17(shown);
}

// Fixed-point seconds from an integer millisecond count.
inline std::string fmt_ms(long long ms) {
    char buf[40];
    const char* sgn = ms < 0 ? "-" : "";
    if (ms < 0) ms = -ms;
    std::snprintf(buf, sizeof buf, "%s%lld.%03lld", sgn, ms / 1000, ms % 1000);
    return buf;
}

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace quori::text
