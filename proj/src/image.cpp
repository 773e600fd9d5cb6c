#include "lasq/image.hpp"

#include <stdexcept>

namespace lasq {

Yuv rgb_to_yuv(const Image& img) {
    if (!img.valid()) throw std::invalid_argument("rgb_to_yuv: invalid image");
    const Grid2D& r = img.ch[0];
    const Grid2D& g = img.ch[1];
    const Grid2D& b = img.ch[2];
    Yuv out;
    out.y = 0.299 * r + 0.587 * g + 0.114 * b;
    out.u = 0.492 * (b - out.y);
    out.v = 0.877 * (r - out.y);
    return out;
}

Image yuv_to_rgb(const Yuv& yuv) {
    Image out;
    Grid2D r = yuv.v / 0.877 + yuv.y;
    Grid2D b = yuv.u / 0.492 + yuv.y;
    Grid2D g = (yuv.y - 0.299 * r - 0.114 * b) / 0.587;
    out.ch[0] = r.min(1.0).max(0.0);
    out.ch[1] = g.min(1.0).max(0.0);
    out.ch[2] = b.min(1.0).max(0.0);
    return out;
}

}  // namespace lasq
