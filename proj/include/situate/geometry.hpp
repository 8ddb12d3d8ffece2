#pragma once

namespace situate {

// Axis-aligned box in pixel space. Coordinates are continuous; snapping
// to integer pixels happens only at file output.
struct PixelBox {
    double x = 0; // left edge
    double y = 0; // top edge
    double w = 0;
    double h = 0;

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double area() const { return w * h; }
};

struct ImageDims {
    double width = 0;
    double height = 0;
};

// Normalized (center, area-ratio, aspect-ratio) parameterization of a box
// relative to an image frame. For in-frame boxes cx, cy lie in [0, 1],
// area_ratio in (0, 1] and aspect_ratio > 0.
struct BoxParams {
    double cx = 0;
    double cy = 0;
    double area_ratio = 0;
    double aspect_ratio = 0;
};

// Intersection over union. Degenerate non-overlap returns 0.
double iou(const PixelBox& a, const PixelBox& b);

// Normalized parameterization of `box` within `dims`. Rejects zero-area boxes.
BoxParams to_params(const PixelBox& box, const ImageDims& dims);

// Inverse of to_params, clipped to the frame with a minimum side of 1 pixel.
PixelBox from_params(const BoxParams& p, const ImageDims& dims);

// Clip a box to the image frame, keeping a minimum side of 1 pixel.
// Idempotent.
PixelBox clip_to_frame(const PixelBox& box, const ImageDims& dims);

bool box_in_frame(const PixelBox& box, const ImageDims& dims, double tol = 1e-9);

} // namespace situate
