#ifndef LLGEO_TESTS_FIXTURES_HPP
#define LLGEO_TESTS_FIXTURES_HPP

#include <vector>

#include "llgeo/grid.hpp"
#include "llgeo/measurement.hpp"

namespace llgeo_tests {

// Two-grid, one-antenna worked example: grid A (cell 0,0) holds five samples
// with RSS {-53,-55,-57,-59,-61}, grid B (cell 1,0) five with
// {-58,-60,-62,-64,-66}. Means are exactly -57 and -62; the -61 query is the
// nearest-mean failure case (|-61-(-62)| < |-61-(-57)| yet it belongs to A).
inline llgeo::GridSpec two_grid_spec() {
    llgeo::GridSpec spec;
    spec.origin = llgeo::Point(0.0, 0.0);
    spec.cell_size = 20.0;
    return spec;
}

inline std::vector<llgeo::LocatedSample> two_grid_samples(int antenna_id = 1) {
    const llgeo::GridSpec spec = two_grid_spec();
    const llgeo::Point center_a = llgeo::center_of(llgeo::GridId{0, 0}, spec);
    const llgeo::Point center_b = llgeo::center_of(llgeo::GridId{1, 0}, spec);
    std::vector<llgeo::LocatedSample> out;
    std::int64_t id = 1;
    for (double rss : {-53.0, -55.0, -57.0, -59.0, -61.0}) {
        llgeo::LocatedSample s;
        s.id = id++;
        s.position = center_a;
        s.measurement.readings[antenna_id] = rss;
        out.push_back(s);
    }
    for (double rss : {-58.0, -60.0, -62.0, -64.0, -66.0}) {
        llgeo::LocatedSample s;
        s.id = id++;
        s.position = center_b;
        s.measurement.readings[antenna_id] = rss;
        out.push_back(s);
    }
    return out;
}

}  // namespace llgeo_tests

#endif
