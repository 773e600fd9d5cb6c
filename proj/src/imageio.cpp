#include "lasq/imageio.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace lasq {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int next_ppm_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {  // comment runs to end of line
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return 0;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok.empty() ? -1 : 0;
}

Image load_ppm(std::ifstream& in, const std::string& path) {
    std::string tok;
    if (next_ppm_token(in, tok) != 0 || tok != "P6")
        throw IoError(IoError::Kind::BadHeader, path + ": not a binary PPM (P6)");
    long w = 0, h = 0, maxval = 0;
    try {
        if (next_ppm_token(in, tok) != 0) throw std::invalid_argument("eof");
        w = std::stol(tok);
        if (next_ppm_token(in, tok) != 0) throw std::invalid_argument("eof");
        h = std::stol(tok);
        if (next_ppm_token(in, tok) != 0) throw std::invalid_argument("eof");
        maxval = std::stol(tok);
    } catch (const std::exception&) {
        throw IoError(IoError::Kind::BadHeader, path + ": malformed PPM header");
    }
    if (w < 1 || h < 1) throw IoError(IoError::Kind::BadHeader, path + ": bad dimensions");
    if (maxval != 255 && maxval != 65535)
        throw IoError(IoError::Kind::UnsupportedFormat, path + ": only 8/16-bit PPM supported");

    const int bytes_per_sample = maxval == 255 ? 1 : 2;
    std::vector<unsigned char> raw(static_cast<size_t>(w) * h * 3 * bytes_per_sample);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw IoError(IoError::Kind::Truncated, path + ": truncated pixel data");

    Image img(h, w);
    const double scale = 1.0 / static_cast<double>(maxval);
    size_t p = 0;
    for (long i = 0; i < h; ++i) {
        for (long j = 0; j < w; ++j) {
            for (int c = 0; c < 3; ++c) {
                unsigned v = raw[p++];
                if (bytes_per_sample == 2) v = (v << 8) | raw[p++];  // big-endian per PPM
                img.ch[c](i, j) = v * scale;
            }
        }
    }
    return img;
}

void save_ppm(const Image& img, const std::string& path, int bit_depth) {
    const long maxval = bit_depth == 8 ? 255 : 65535;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(IoError::Kind::WriteFailure, path + ": cannot open for writing");
    out << "P6\n" << img.cols() << " " << img.rows() << "\n" << maxval << "\n";
    for (Eigen::Index i = 0; i < img.rows(); ++i) {
        for (Eigen::Index j = 0; j < img.cols(); ++j) {
            for (int c = 0; c < 3; ++c) {
                long v = std::llround(img.ch[c](i, j) * maxval);
                v = std::min(maxval, std::max(0L, v));
                if (bit_depth == 16) out.put(static_cast<char>((v >> 8) & 0xFF));
                out.put(static_cast<char>(v & 0xFF));
            }
        }
    }
    if (!out) throw IoError(IoError::Kind::WriteFailure, path + ": write failed");
}

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

Image load_png(const std::string& path) {
    PngReadCloser s;
    s.fp = std::fopen(path.c_str(), "rb");
    if (!s.fp) throw IoError(IoError::Kind::MissingFile, path + ": cannot open");
    s.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    s.info = png_create_info_struct(s.png);
    if (!s.png || !s.info) throw IoError(IoError::Kind::BadHeader, path + ": png init failed");
    if (setjmp(png_jmpbuf(s.png)))
        throw IoError(IoError::Kind::BadHeader, path + ": png decode failed");

    png_init_io(s.png, s.fp);
    png_read_info(s.png, s.info);

    png_set_palette_to_rgb(s.png);
    png_set_expand_gray_1_2_4_to_8(s.png);
    png_set_gray_to_rgb(s.png);
    png_set_strip_alpha(s.png);
    png_read_update_info(s.png, s.info);

    const png_uint_32 w = png_get_image_width(s.png, s.info);
    const png_uint_32 h = png_get_image_height(s.png, s.info);
    const int depth = png_get_bit_depth(s.png, s.info);
    if (png_get_color_type(s.png, s.info) != PNG_COLOR_TYPE_RGB || (depth != 8 && depth != 16))
        throw IoError(IoError::Kind::UnsupportedFormat, path + ": only 8/16-bit RGB PNG");

    const size_t stride = png_get_rowbytes(s.png, s.info);
    std::vector<unsigned char> raw(stride * h);
    std::vector<png_bytep> row_ptrs(h);
    for (png_uint_32 i = 0; i < h; ++i) row_ptrs[i] = raw.data() + i * stride;
    png_read_image(s.png, row_ptrs.data());

    Image img(h, w);
    const double scale = depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
    for (png_uint_32 i = 0; i < h; ++i) {
        const unsigned char* row = raw.data() + i * stride;
        for (png_uint_32 j = 0; j < w; ++j) {
            for (int c = 0; c < 3; ++c) {
                unsigned v;
                if (depth == 8) {
                    v = row[j * 3 + c];
                } else {
                    v = (static_cast<unsigned>(row[(j * 3 + c) * 2]) << 8) |
                        row[(j * 3 + c) * 2 + 1];
                }
                img.ch[c](i, j) = v * scale;
            }
        }
    }
    return img;
}

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriteCloser() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void save_png(const Image& img, const std::string& path, int bit_depth) {
    PngWriteCloser s;
    s.fp = std::fopen(path.c_str(), "wb");
    if (!s.fp) throw IoError(IoError::Kind::WriteFailure, path + ": cannot open for writing");
    s.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    s.info = png_create_info_struct(s.png);
    if (!s.png || !s.info) throw IoError(IoError::Kind::WriteFailure, path + ": png init failed");
    if (setjmp(png_jmpbuf(s.png)))
        throw IoError(IoError::Kind::WriteFailure, path + ": png encode failed");

    png_init_io(s.png, s.fp);
    png_set_IHDR(s.png, s.info, static_cast<png_uint_32>(img.cols()),
                 static_cast<png_uint_32>(img.rows()), bit_depth, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(s.png, s.info);

    const long maxval = bit_depth == 8 ? 255 : 65535;
    const size_t stride = static_cast<size_t>(img.cols()) * 3 * (bit_depth / 8);
    std::vector<unsigned char> row(stride);
    for (Eigen::Index i = 0; i < img.rows(); ++i) {
        size_t p = 0;
        for (Eigen::Index j = 0; j < img.cols(); ++j) {
            for (int c = 0; c < 3; ++c) {
                long v = std::llround(img.ch[c](i, j) * maxval);
                v = std::min(maxval, std::max(0L, v));
                if (bit_depth == 16) row[p++] = static_cast<unsigned char>((v >> 8) & 0xFF);
                row[p++] = static_cast<unsigned char>(v & 0xFF);
            }
        }
        png_write_row(s.png, row.data());
    }
    png_write_end(s.png, nullptr);
}

}  // namespace

Image load_image(const std::string& path) {
    if (ends_with(path, ".png") || ends_with(path, ".PNG")) return load_png(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoError::Kind::MissingFile, path + ": cannot open");
    return load_ppm(in, path);
}

void save_image(const Image& img, const std::string& path, int bit_depth) {
    if (!img.valid()) throw std::invalid_argument("save_image: invalid image");
    if (bit_depth != 8 && bit_depth != 16)
        throw std::invalid_argument("save_image: bit depth must be 8 or 16");
    if (ends_with(path, ".png") || ends_with(path, ".PNG"))
        save_png(img, path, bit_depth);
    else
        save_ppm(img, path, bit_depth);
}

}  // namespace lasq
