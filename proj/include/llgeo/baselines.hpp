#ifndef LLGEO_BASELINES_HPP
#define LLGEO_BASELINES_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "llgeo/grid.hpp"
#include "llgeo/lookup.hpp"
#include "llgeo/measurement.hpp"
#include "llgeo/scenario.hpp"

namespace llgeo {

enum class MeasurementDistanceKind { EuclideanSharedSupport, CosineSharedSupport };

MeasurementDistanceKind distance_kind_of(const std::string& name);
const char* to_string(MeasurementDistanceKind k);

// Per-grid mean RSS vectors at full precision (no binning). Means are
// NaN-omitting: an antenna contributes to a grid's mean only where observed.
struct RfpIndex {
    struct Stats {
        double mean = 0.0;
        std::size_t count = 0;
        bool operator==(const Stats&) const = default;
    };

    GridSpec grid;
    std::map<GridId, std::map<int, Stats>> grids;

    bool empty() const { return grids.empty(); }
    bool operator==(const RfpIndex& other) const {
        return grid.origin == other.grid.origin && grid.cell_size == other.grid.cell_size &&
               grids == other.grids;
    }
};

// Means are accumulated per (grid, antenna) and summed in sorted value
// order, so the result is exactly permutation-invariant over the samples.
RfpIndex build_rfp_index(const std::vector<LocatedSample>& samples, const GridSpec& spec);

// Distance over the shared support only; disjoint support (or a zero-norm
// side under the cosine kind) yields +infinity, the "cannot match" sentinel.
double measurement_distance(const Measurement& a, const Measurement& b,
                            MeasurementDistanceKind kind);

// Full scan over all grids (linear cost is part of the contract; ops counts
// one distance evaluation per grid). Ties break toward the lexicographically
// smaller GridId.
LocationEstimate rfp_localize(const Measurement& m, const RfpIndex& index,
                              MeasurementDistanceKind kind =
                                  MeasurementDistanceKind::EuclideanSharedSupport);

struct TlOptions {
    int max_iterations = 100;
    double step_tolerance = 1e-6;  // meters
};

// Least-squares lateration on squared-distance residuals
//   f_i = |a_i - p|^2 - d(r_i)^2,  minimize sum f_i^2
// via Gauss-Newton with Levenberg damping, started from the inverse-distance
// weighted centroid of the observed antennas (nudged off the anchor line
// when the geometry is collinear, since that line traps the descent).
// Collinear geometries have a mirror-symmetric second minimum; the
// lower-objective candidate is returned and the estimate is marked ambiguous
// when the two objectives agree within a 1e-9 relative band.
LocationEstimate tl_localize(const Measurement& m, const std::vector<Antenna>& antennas,
                             const PathLossModel& model, const TlOptions& opts = {});

// Canonical line-text artifact, analogous to the lookup-table format.
void write_rfp_index(std::ostream& out, const RfpIndex& index);
RfpIndex read_rfp_index(std::istream& in);
void save_rfp_index(const std::string& path, const RfpIndex& index);
RfpIndex load_rfp_index(const std::string& path);

}  // namespace llgeo

#endif
