#pragma once

#include <stdexcept>
#include <string>

#include "lasq/image.hpp"

namespace lasq {

struct IoError : std::runtime_error {
    enum class Kind { MissingFile, BadHeader, UnsupportedFormat, Truncated, WriteFailure };
    Kind kind;
    IoError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

/// Load an 8/16-bit binary PPM (P6) or RGB PNG; samples map to v/(2^d - 1).
Image load_image(const std::string& path);

/// Save as PPM or PNG (by extension) at bit depth 8 or 16. Values are
/// quantized with round-half-away-from-zero.
void save_image(const Image& img, const std::string& path, int bit_depth = 8);

}  // namespace lasq
