#ifndef LLGEO_MEASUREMENT_HPP
#define LLGEO_MEASUREMENT_HPP

#include <cstdint>
#include <map>

#include "llgeo/common.hpp"
#include "llgeo/grid.hpp"

namespace llgeo {

// Sparse RSS vector: absent antenna = no reading (NaN in the dense view).
// Ordered map so iteration order is deterministic everywhere.
struct Measurement {
    std::map<int, double> readings;

    bool empty() const { return readings.empty(); }
    auto operator<=>(const Measurement&) const = default;
};

struct LocatedSample {
    std::int64_t id = 0;
    Point position{0.0, 0.0};
    Measurement measurement;
};

// Bins every reading to its integer bin index (kept as a double-valued
// Measurement so binned and raw vectors share comparison code).
inline Measurement bin_measurement(const Measurement& m, const BinSpec& spec) {
    Measurement out;
    for (const auto& [aid, rss] : m.readings)
        out.readings[aid] = static_cast<double>(bin_rss(rss, spec));
    return out;
}

}  // namespace llgeo

#endif
