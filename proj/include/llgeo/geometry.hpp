#ifndef LLGEO_GEOMETRY_HPP
#define LLGEO_GEOMETRY_HPP

#include "llgeo/common.hpp"

namespace llgeo {

// Axis-aligned rectangle, used for obstacles and sampling extents.
struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

    void validate() const {
        if (!(xmin < xmax) || !(ymin < ymax))
            throw ConfigError("rectangle must satisfy xmin<xmax and ymin<ymax");
    }
    bool contains(const Point& p) const {
        return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
    }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
};

// True iff the open segment (a,b) passes through the interior of r.
// Touching the boundary (endpoint on an edge, segment grazing a corner or
// running along an edge) does not count: crossings are measure-positive.
bool segment_crosses_interior(const Point& a, const Point& b, const Rect& r);

}  // namespace llgeo

#endif
