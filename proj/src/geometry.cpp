#include "situate/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace situate {

double iou(const PixelBox& a, const PixelBox& b) {
    double ix = std::max(a.x, b.x);
    double iy = std::max(a.y, b.y);
    double ix2 = std::min(a.right(), b.right());
    double iy2 = std::min(a.bottom(), b.bottom());
    double iw = ix2 - ix;
    double ih = iy2 - iy;
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    double inter = iw * ih;
    double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

BoxParams to_params(const PixelBox& box, const ImageDims& dims) {
    if (box.w <= 0.0 || box.h <= 0.0)
        throw std::invalid_argument("to_params: zero-area box");
    if (dims.width <= 0.0 || dims.height <= 0.0)
        throw std::invalid_argument("to_params: invalid image dims");
    BoxParams p;
    p.cx = box.cx() / dims.width;
    p.cy = box.cy() / dims.height;
    p.area_ratio = box.area() / (dims.width * dims.height);
    p.aspect_ratio = box.w / box.h;
    return p;
}

PixelBox from_params(const BoxParams& p, const ImageDims& dims) {
    if (p.area_ratio <= 0.0 || p.aspect_ratio <= 0.0)
        throw std::invalid_argument("from_params: nonpositive area or aspect ratio");
    double w = std::sqrt(p.area_ratio * dims.width * dims.height * p.aspect_ratio);
    double h = w / p.aspect_ratio;
    PixelBox box{p.cx * dims.width - w / 2.0, p.cy * dims.height - h / 2.0, w, h};
    return clip_to_frame(box, dims);
}

PixelBox clip_to_frame(const PixelBox& box, const ImageDims& dims) {
    double min_side = 1.0;
    double w = std::clamp(box.w, min_side, dims.width);
    double h = std::clamp(box.h, min_side, dims.height);
    double x = std::clamp(box.x, 0.0, dims.width - w);
    double y = std::clamp(box.y, 0.0, dims.height - h);
    return PixelBox{x, y, w, h};
}

bool box_in_frame(const PixelBox& box, const ImageDims& dims, double tol) {
    return box.w > 0.0 && box.h > 0.0 && box.x >= -tol && box.y >= -tol &&
           box.right() <= dims.width + tol && box.bottom() <= dims.height + tol;
}

} // namespace situate
