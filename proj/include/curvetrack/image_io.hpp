#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "curvetrack/errors.hpp"
#include "curvetrack/field.hpp"

namespace curvetrack {

namespace detail {

inline void skip_pnm_whitespace(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

inline int read_pnm_int(std::istream& in, const std::string& path) {
    skip_pnm_whitespace(in);
    int v = -1;
    if (!(in >> v) || v < 0) throw io_error("malformed PGM header in " + path);
    return v;
}

struct RawPgm {
    int width = 0, height = 0, maxval = 0;
    std::vector<uint16_t> pixels;  // widened to 16 bit regardless of source depth
};

inline RawPgm read_pgm_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw io_error("not a binary PGM (P5): " + path);
    RawPgm img;
    img.width = read_pnm_int(in, path);
    img.height = read_pnm_int(in, path);
    img.maxval = read_pnm_int(in, path);
    if (img.width < 1 || img.height < 1 || img.maxval < 1 || img.maxval > 65535)
        throw io_error("unsupported PGM geometry in " + path);
    in.get();  // single whitespace byte after maxval
    const size_t n = static_cast<size_t>(img.width) * img.height;
    img.pixels.resize(n);
    if (img.maxval < 256) {
        std::vector<uint8_t> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (!in) throw io_error("truncated PGM data in " + path);
        for (size_t i = 0; i < n; ++i) img.pixels[i] = buf[i];
    } else {
        std::vector<uint8_t> buf(2 * n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * n));
        if (!in) throw io_error("truncated PGM data in " + path);
        for (size_t i = 0; i < n; ++i)
            img.pixels[i] = static_cast<uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
    return img;
}

inline ScalarField load_png_gray(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw io_error("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw io_error("libpng initialization failed for " + path);
    }
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw io_error("PNG decode error in " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw io_error("only grayscale PNG is supported: " + path);
    }
    if (depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
        depth = 8;
    }
    png_read_update_info(png, info);
    const size_t stride = png_get_rowbytes(png, info);
    std::vector<uint8_t> data(stride * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = data.data() + y * stride;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);

    if (w < 2 || h < 2) throw io_error("image too small: " + path);
    ScalarField f(static_cast<int>(w), static_cast<int>(h));
    const double scale = depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
    for (png_uint_32 y = 0; y < h; ++y) {
        const uint8_t* r = data.data() + y * stride;
        for (png_uint_32 x = 0; x < w; ++x) {
            const double v = depth == 16
                                 ? static_cast<double>((r[2 * x] << 8) | r[2 * x + 1])
                                 : static_cast<double>(r[x]);
            f(static_cast<int>(x), static_cast<int>(y)) = v * scale;
        }
    }
    return f;
}

inline void append_u32_le(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline uint32_t read_u32_le(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace detail

// Grayscale raster, normalized to [0, 1]. PGM (P5) and grayscale PNG accepted.
inline ScalarField load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw io_error("cannot open " + path);
    unsigned char sig[2] = {0, 0};
    probe.read(reinterpret_cast<char*>(sig), 2);
    probe.close();
    if (sig[0] == 0x89 && sig[1] == 'P') return detail::load_png_gray(path);
    if (sig[0] == 'P' && sig[1] == '5') {
        auto raw = detail::read_pgm_raw(path);
        if (raw.width < 2 || raw.height < 2) throw io_error("image too small: " + path);
        ScalarField f(raw.width, raw.height);
        const double scale = 1.0 / raw.maxval;
        for (size_t i = 0; i < raw.pixels.size(); ++i) f[i] = raw.pixels[i] * scale;
        return f;
    }
    throw io_error("unsupported raster format: " + path);
}

// Quantize [0,1] values into an 8- or 16-bit binary PGM.
inline void save_pgm(const ScalarField& f, const std::string& path, int bit_depth = 16) {
    if (bit_depth != 8 && bit_depth != 16) throw param_error("save_pgm: bit depth must be 8 or 16");
    const int maxval = bit_depth == 8 ? 255 : 65535;
    std::string out = "P5\n" + std::to_string(f.width()) + " " + std::to_string(f.height()) +
                      "\n" + std::to_string(maxval) + "\n";
    out.reserve(out.size() + f.size() * (bit_depth / 8));
    for (size_t i = 0; i < f.size(); ++i) {
        const double v = std::clamp(f[i], 0.0, 1.0);
        const int q = static_cast<int>(std::lround(v * maxval));
        if (bit_depth == 8) {
            out.push_back(static_cast<char>(q));
        } else {
            out.push_back(static_cast<char>((q >> 8) & 0xff));
            out.push_back(static_cast<char>(q & 0xff));
        }
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot write " + path);
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw io_error("write failed: " + path);
}

// 8-bit PGM where the pixel value is the class label.
inline void save_label_map(const LabelMap& m, const std::string& path) {
    std::string out = "P5\n" + std::to_string(m.width()) + " " + std::to_string(m.height()) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(m.data()), m.size());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot write " + path);
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw io_error("write failed: " + path);
}

inline LabelMap load_label_map(const std::string& path, int num_classes = 0) {
    auto raw = detail::read_pgm_raw(path);
    if (raw.maxval > 255) throw io_error("label map must be 8-bit PGM: " + path);
    int maxlabel = 0;
    for (uint16_t v : raw.pixels) maxlabel = std::max(maxlabel, static_cast<int>(v));
    if (num_classes == 0) num_classes = maxlabel + 1;
    if (maxlabel >= num_classes) throw io_error("label exceeds declared class count: " + path);
    LabelMap m(raw.width, raw.height, num_classes);
    for (size_t i = 0; i < raw.pixels.size(); ++i) m[i] = static_cast<uint8_t>(raw.pixels[i]);
    return m;
}

// CTF1: 16-byte header (magic "CTF1", u32 width, u32 height, u32 components,
// little-endian) followed by float32 little-endian samples, row-major,
// components interleaved per pixel.
inline void save_ctf(const std::string& path, int width, int height,
                     std::span<const ScalarField* const> components) {
    std::string out = "CTF1";
    detail::append_u32_le(out, static_cast<uint32_t>(width));
    detail::append_u32_le(out, static_cast<uint32_t>(height));
    detail::append_u32_le(out, static_cast<uint32_t>(components.size()));
    const size_t n = static_cast<size_t>(width) * height;
    for (size_t i = 0; i < n; ++i)
        for (const ScalarField* c : components)
            detail::append_u32_le(out, std::bit_cast<uint32_t>(static_cast<float>((*c)[i])));
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot write " + path);
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw io_error("write failed: " + path);
}

inline void save_ctf(const std::string& path, const ScalarField& f) {
    const ScalarField* c[] = {&f};
    save_ctf(path, f.width(), f.height(), c);
}

inline void save_ctf(const std::string& path, const VectorField& f) {
    const ScalarField* c[] = {&f.u, &f.v};
    save_ctf(path, f.width(), f.height(), c);
}

struct CtfData {
    int width = 0, height = 0, components = 0;
    std::vector<float> samples;  // interleaved
};

inline CtfData load_ctf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    uint8_t header[16];
    in.read(reinterpret_cast<char*>(header), 16);
    if (!in || std::memcmp(header, "CTF1", 4) != 0)
        throw io_error("not a CTF1 field: " + path);
    CtfData d;
    d.width = static_cast<int>(detail::read_u32_le(header + 4));
    d.height = static_cast<int>(detail::read_u32_le(header + 8));
    d.components = static_cast<int>(detail::read_u32_le(header + 12));
    if (d.width < 1 || d.height < 1 || d.components < 1 || d.components > 4)
        throw io_error("bad CTF1 header: " + path);
    const size_t n = static_cast<size_t>(d.width) * d.height * d.components;
    std::vector<uint8_t> buf(4 * n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw io_error("truncated CTF1 data: " + path);
    d.samples.resize(n);
    for (size_t i = 0; i < n; ++i)
        d.samples[i] = std::bit_cast<float>(detail::read_u32_le(buf.data() + 4 * i));
    return d;
}

inline ScalarField ctf_to_scalar(const CtfData& d) {
    if (d.components != 1) throw io_error("expected 1-component CTF1 field");
    ScalarField f(d.width, d.height);
    for (size_t i = 0; i < f.size(); ++i) f[i] = d.samples[i];
    return f;
}

inline VectorField ctf_to_vector(const CtfData& d) {
    if (d.components != 2) throw io_error("expected 2-component CTF1 field");
    VectorField f(d.width, d.height);
    for (size_t i = 0; i < f.u.size(); ++i) {
        f.u[i] = d.samples[2 * i];
        f.v[i] = d.samples[2 * i + 1];
    }
    return f;
}

}  // namespace curvetrack
