#include "llgeo/geometry.hpp"

#include <algorithm>

namespace llgeo {

namespace {

// One Liang-Barsky half-plane clip step against p*t <= q (interior side
// strict). Returns false when the segment is entirely outside. For a
// segment parallel to the boundary (p == 0), q <= 0 means it runs on or
// outside the boundary line, which can never touch the open interior.
bool clip(double p, double q, double& t0, double& t1) {
    if (p == 0.0) return q > 0.0;
    const double t = q / p;
    if (p < 0.0) {
        if (t > t1) return false;
        if (t > t0) t0 = t;
    } else {
        if (t < t0) return false;
        if (t < t1) t1 = t;
    }
    return true;
}

}  // namespace

bool segment_crosses_interior(const Point& a, const Point& b, const Rect& r) {
    r.validate();
    const double dx = b.x() - a.x();
    const double dy = b.y() - a.y();
    if (dx == 0.0 && dy == 0.0) return false;  // empty open segment
    double t0 = 0.0, t1 = 1.0;
    if (!clip(-dx, a.x() - r.xmin, t0, t1)) return false;
    if (!clip(dx, r.xmax - a.x(), t0, t1)) return false;
    if (!clip(-dy, a.y() - r.ymin, t0, t1)) return false;
    if (!clip(dy, r.ymax - a.y(), t0, t1)) return false;
    // Strict: a degenerate clip interval means the segment only touches the
    // boundary (corner graze), which is not an interior crossing.
    return t0 < t1;
}

}  // namespace llgeo
