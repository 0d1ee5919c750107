#pragma once

// 8-bit RGB raster with portable pixmap (PPM/PGM) I/O.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace quori {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {})
        : width_(width), height_(height), px_(static_cast<size_t>(width) * height, fill) {
        if (width < 0 || height < 0) throw validation_error("negative image size", "image");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return px_.empty(); }

    Rgb& at(int x, int y) { return px_[static_cast<size_t>(y) * width_ + x]; }
    const Rgb& at(int x, int y) const { return px_[static_cast<size_t>(y) * width_ + x]; }

    const std::vector<Rgb>& pixels() const { return px_; }

    bool operator==(const Image&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> px_;
};

namespace detail {

// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pnm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

inline int pnm_int(std::istream& in, const char* what) {
    std::string t = pnm_token(in);
    try {
        size_t used = 0;
        int v = std::stoi(t, &used);
        if (used != t.size() || v < 0) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw parse_error(std::string("bad PNM ") + what + " '" + t + "'", 0);
    }
}

}  // namespace detail

// Reads P2/P3/P5/P6 with maxval <= 255. Grey images expand to RGB.
inline Image read_pnm(std::istream& in) {
    std::string magic = detail::pnm_token(in);
    if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6")
        throw parse_error("unsupported image format '" + magic + "'", 0);
    int w = detail::pnm_int(in, "width");
    int h = detail::pnm_int(in, "height");
    int maxval = detail::pnm_int(in, "maxval");
    if (maxval <= 0 || maxval > 255) throw parse_error("PNM maxval must be 1..255", 0);
    bool grey = magic == "P2" || magic == "P5";
    bool binary = magic == "P5" || magic == "P6";
    Image img(w, h);
    auto scale = [&](int v) {
        if (v < 0 || v > maxval) throw parse_error("PNM sample out of range", 0);
        return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    };
    auto next = [&]() -> int {
        if (binary) {
            int c = in.get();
            if (c == EOF) throw parse_error("truncated PNM data", 0);
            return c;
        }
        return detail::pnm_int(in, "sample");
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            Rgb& p = img.at(x, y);
            if (grey) {
                p.r = p.g = p.b = scale(next());
            } else {
                p.r = scale(next());
                p.g = scale(next());
                p.b = scale(next());
            }
        }
    return img;
}

inline Image read_pnm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open " + path, 0);
    return read_pnm(in);
}

inline void write_ppm(std::ostream& out, const Image& img) {
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    for (const Rgb& p : img.pixels()) {
        out.put(static_cast<char>(p.r));
        out.put(static_cast<char>(p.g));
        out.put(static_cast<char>(p.b));
    }
}

inline void write_ppm_file(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write " + path, "out");
    write_ppm(out, img);
}

}  // namespace quori
