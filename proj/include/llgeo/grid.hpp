#ifndef LLGEO_GRID_HPP
#define LLGEO_GRID_HPP

#include <cmath>
#include <compare>
#include <cstdint>

#include "llgeo/common.hpp"

namespace llgeo {

// Uniform square partition of the plane. Cells are half-open:
// cell (ix,iy) covers [origin + i*size, origin + (i+1)*size) per axis.
struct GridSpec {
    Point origin{0.0, 0.0};
    double cell_size = 1.0;

    void validate() const {
        if (!(cell_size > 0.0) || !std::isfinite(cell_size))
            throw ConfigError("grid cell_size must be positive and finite");
        if (!origin.allFinite())
            throw ConfigError("grid origin must be finite");
    }
};

struct GridId {
    std::int64_t ix = 0;
    std::int64_t iy = 0;
    auto operator<=>(const GridId&) const = default;
};

// RSS bin width s in dBm. Bins are half-open [b*s, (b+1)*s).
struct BinSpec {
    double bin_size = 1.0;

    void validate() const {
        if (!(bin_size > 0.0) || !std::isfinite(bin_size))
            throw ConfigError("bin_size must be positive and finite");
    }
};

inline GridId grid_of(const Point& p, const GridSpec& spec) {
    spec.validate();
    return GridId{
        static_cast<std::int64_t>(std::floor((p.x() - spec.origin.x()) / spec.cell_size)),
        static_cast<std::int64_t>(std::floor((p.y() - spec.origin.y()) / spec.cell_size)),
    };
}

inline Point center_of(const GridId& g, const GridSpec& spec) {
    spec.validate();
    return Point(spec.origin.x() + (static_cast<double>(g.ix) + 0.5) * spec.cell_size,
                 spec.origin.y() + (static_cast<double>(g.iy) + 0.5) * spec.cell_size);
}

inline std::int64_t bin_rss(double r, const BinSpec& spec) {
    spec.validate();
    if (!std::isfinite(r)) throw ConfigError("RSS value must be finite");
    return static_cast<std::int64_t>(std::floor(r / spec.bin_size));
}

}  // namespace llgeo

#endif
