#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "mcshape/imaging.hpp"

// Image file I/O.
//
// PGM P2/P5 read and write (maxval <= 255). Writes are canonical: P5 emits
// "P5\n<w> <h>\n255\n" plus raw rows, P2 emits one ASCII pixel row per line;
// canonical files round-trip bitwise through read/write. PNG is read-only:
// 8-bit grayscale or RGB, non-interlaced; color converts by the luma
// weights round(0.299 R + 0.587 G + 0.114 B). Label images are stored as
// PGM with gray value = label.

namespace mcshape {

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------------

namespace detail {

/// Reads the next PNM header token, skipping whitespace and # comments.
inline std::string pnm_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        const char c = static_cast<char>(bytes[pos]);
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            ++pos;
        } else {
            break;
        }
    }
    std::string token;
    while (pos < bytes.size()) {
        const char c = static_cast<char>(bytes[pos]);
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v' || c == '#')
            break;
        token.push_back(c);
        ++pos;
    }
    if (token.empty()) throw io_error("malformed PGM header: unexpected end of file");
    return token;
}

inline int pnm_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    const std::string token = pnm_token(bytes, pos);
    std::size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(token, &used);
    } catch (const std::exception&) {
        throw io_error("malformed PGM header: expected integer, got '" + token + "'");
    }
    if (used != token.size()) throw io_error("malformed PGM header: bad integer '" + token + "'");
    return value;
}

} // namespace detail

inline GrayImage read_pgm(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    const std::string magic = detail::pnm_token(bytes, pos);
    if (magic != "P2" && magic != "P5") throw io_error("not a P2/P5 PGM file");

    const int width = detail::pnm_int(bytes, pos);
    const int height = detail::pnm_int(bytes, pos);
    const int maxval = detail::pnm_int(bytes, pos);
    if (width < 1 || height < 1) throw io_error("malformed PGM header: bad dimensions");
    if (maxval < 1) throw io_error("malformed PGM header: bad maxval");
    if (maxval > 255) throw io_error("unsupported PGM depth: maxval " + std::to_string(maxval));

    GrayImage image = make_gray(width, height);
    if (magic == "P5") {
        ++pos; // single whitespace after maxval
        if (bytes.size() - pos < image.pixels.size()) throw io_error("truncated P5 pixel data");
        std::memcpy(image.pixels.data(), bytes.data() + pos, image.pixels.size());
    } else {
        for (std::size_t idx = 0; idx < image.pixels.size(); ++idx) {
            const int value = detail::pnm_int(bytes, pos);
            if (value < 0 || value > maxval)
                throw io_error("P2 pixel value out of range: " + std::to_string(value));
            image.pixels[idx] = static_cast<std::uint8_t>(value);
        }
    }
    return image;
}

inline std::string write_pgm_p5(const GrayImage& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

inline std::string write_pgm_p2(const GrayImage& image) {
    std::string out = "P2\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n255\n";
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            if (x > 0) out.push_back(' ');
            out += std::to_string(image.at(x, y));
        }
        out.push_back('\n');
    }
    return out;
}

// ---------------------------------------------------------------------------
// PNG (read only)
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline std::uint8_t paeth_predictor(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
    if (pb <= pc) return static_cast<std::uint8_t>(b);
    return static_cast<std::uint8_t>(c);
}

} // namespace detail

inline GrayImage read_png(const std::vector<std::uint8_t>& bytes) {
    static const std::uint8_t signature[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), signature, 8) != 0)
        throw io_error("not a PNG file");

    std::uint32_t width = 0, height = 0;
    int color_type = -1;
    std::vector<std::uint8_t> compressed;
    bool saw_ihdr = false, saw_iend = false;

    std::size_t pos = 8;
    while (pos + 8 <= bytes.size() && !saw_iend) {
        const std::uint32_t length = detail::be32(bytes.data() + pos);
        if (pos + 12 + length > bytes.size()) throw io_error("truncated PNG chunk");
        const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
        const std::uint8_t* data = bytes.data() + pos + 8;

        const std::uint32_t stored_crc = detail::be32(data + length);
        std::uint32_t crc = crc32(0L, Z_NULL, 0);
        crc = crc32(crc, bytes.data() + pos + 4, length + 4);
        if (crc != stored_crc) throw io_error("PNG chunk CRC mismatch");

        if (std::strncmp(type, "IHDR", 4) == 0) {
            if (length != 13) throw io_error("malformed IHDR");
            width = detail::be32(data);
            height = detail::be32(data + 4);
            const int bit_depth = data[8];
            color_type = data[9];
            if (bit_depth != 8) throw io_error("unsupported PNG bit depth");
            if (color_type != 0 && color_type != 2)
                throw io_error("unsupported PNG color type (grayscale or RGB only)");
            if (data[10] != 0 || data[11] != 0) throw io_error("malformed IHDR");
            if (data[12] != 0) throw io_error("interlaced PNG not supported");
            saw_ihdr = true;
        } else if (std::strncmp(type, "IDAT", 4) == 0) {
            if (!saw_ihdr) throw io_error("IDAT before IHDR");
            compressed.insert(compressed.end(), data, data + length);
        } else if (std::strncmp(type, "IEND", 4) == 0) {
            saw_iend = true;
        }
        pos += 12 + length;
    }
    if (!saw_ihdr || !saw_iend || compressed.empty()) throw io_error("malformed PNG stream");
    if (width == 0 || height == 0) throw io_error("malformed PNG dimensions");

    const int channels = color_type == 2 ? 3 : 1;
    const std::size_t row_bytes = static_cast<std::size_t>(width) * channels;
    std::vector<std::uint8_t> raw((row_bytes + 1) * height);

    uLongf raw_size = raw.size();
    const int status = uncompress(raw.data(), &raw_size, compressed.data(),
                                  static_cast<uLong>(compressed.size()));
    if (status != Z_OK || raw_size != raw.size()) throw io_error("PNG inflate failed");

    // Undo per-scanline filters in place.
    std::vector<std::uint8_t> prev_row(row_bytes, 0);
    GrayImage image = make_gray(static_cast<int>(width), static_cast<int>(height));
    for (std::uint32_t y = 0; y < height; ++y) {
        const std::uint8_t filter = raw[(row_bytes + 1) * y];
        std::uint8_t* row = raw.data() + (row_bytes + 1) * y + 1;
        for (std::size_t i = 0; i < row_bytes; ++i) {
            const int left = i >= static_cast<std::size_t>(channels) ? row[i - channels] : 0;
            const int up = prev_row[i];
            const int up_left = i >= static_cast<std::size_t>(channels) ? prev_row[i - channels] : 0;
            switch (filter) {
                case 0: break;
                case 1: row[i] = static_cast<std::uint8_t>(row[i] + left); break;
                case 2: row[i] = static_cast<std::uint8_t>(row[i] + up); break;
                case 3: row[i] = static_cast<std::uint8_t>(row[i] + (left + up) / 2); break;
                case 4:
                    row[i] = static_cast<std::uint8_t>(row[i] +
                                                       detail::paeth_predictor(left, up, up_left));
                    break;
                default: throw io_error("unknown PNG filter type");
            }
        }
        std::memcpy(prev_row.data(), row, row_bytes);

        for (std::uint32_t x = 0; x < width; ++x) {
            if (channels == 1) {
                image.at(static_cast<int>(x), static_cast<int>(y)) = row[x];
            } else {
                const double luma =
                    0.299 * row[3 * x] + 0.587 * row[3 * x + 1] + 0.114 * row[3 * x + 2];
                const long gray = std::lround(luma);
                image.at(static_cast<int>(x), static_cast<int>(y)) =
                    static_cast<std::uint8_t>(std::min(gray, 255L));
            }
        }
    }
    return image;
}

// ---------------------------------------------------------------------------
// Format dispatch and label conventions
// ---------------------------------------------------------------------------

inline GrayImage decode_image(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5'))
        return read_pgm(bytes);
    if (bytes.size() >= 2 && bytes[0] == 137 && bytes[1] == 'P') return read_png(bytes);
    throw io_error("unrecognized image format (want PGM P2/P5 or 8-bit PNG)");
}

inline GrayImage read_image(const std::string& path) { return decode_image(read_file(path)); }

inline LabelImage label_from_gray(const GrayImage& image, int background_label = 0) {
    LabelImage li = make_labels(image.width, image.height, background_label);
    for (std::size_t idx = 0; idx < image.pixels.size(); ++idx)
        li.labels[idx] = image.pixels[idx];
    return li;
}

inline GrayImage gray_from_label(const LabelImage& li) {
    GrayImage image = make_gray(li.width, li.height);
    for (std::size_t idx = 0; idx < li.labels.size(); ++idx) {
        const int label = li.labels[idx];
        if (label < 0 || label > 255)
            throw io_error("label " + std::to_string(label) + " out of PGM range 0..255");
        image.pixels[idx] = static_cast<std::uint8_t>(label);
    }
    return image;
}

inline LabelImage read_label(const std::string& path, int background_label = 0) {
    return label_from_gray(read_image(path), background_label);
}

inline void write_gray(const std::string& path, const GrayImage& image) {
    write_file(path, write_pgm_p5(image));
}

inline void write_label(const std::string& path, const LabelImage& li) {
    write_file(path, write_pgm_p5(gray_from_label(li)));
}

} // namespace mcshape
