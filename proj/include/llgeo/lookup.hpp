#ifndef LLGEO_LOOKUP_HPP
#define LLGEO_LOOKUP_HPP

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "llgeo/grid.hpp"
#include "llgeo/measurement.hpp"
#include "llgeo/scenario.hpp"

namespace llgeo {

enum class EstimateStatus { Resolved, Ambiguous, FallbackDefault };

const char* to_string(EstimateStatus s);

struct LocationEstimate {
    Point position{0.0, 0.0};
    EstimateStatus status = EstimateStatus::Resolved;
    std::size_t candidates_remaining = 0;  // 0 only for fallback-default
    // Abstract cost: table cells probed (LL), grid distances evaluated (RFP),
    // solver iterations (TL). Wall clock is the harness's business.
    std::size_t ops = 0;
    // Surviving candidate positions; filled only when requested via options.
    std::vector<Point> candidates;
};

// Per-antenna, per-bin reference locations. Grid mode stores deduplicated
// grid ids; continuous mode stores cluster centers. Entry lists are kept
// sorted, which makes serialization canonical and candidate averaging
// order-independent of construction.
struct LookupTables {
    enum class Mode { Continuous, Grid };

    struct Key {
        int antenna = 0;
        std::int64_t bin = 0;
        auto operator<=>(const Key&) const = default;
    };

    Mode mode = Mode::Grid;
    BinSpec bin;
    GridSpec grid;                  // grid mode only
    double cluster_diameter = 0.0;  // continuous mode only
    std::map<Key, std::vector<GridId>> grid_cells;
    std::map<Key, std::vector<Point>> point_cells;
    // Optional: lets the fallback path return a real antenna position when
    // the tables were built alongside a scenario. Empty otherwise.
    std::map<int, Point> antenna_positions;

    std::size_t cell_count() const {
        return mode == Mode::Grid ? grid_cells.size() : point_cells.size();
    }
    bool operator==(const LookupTables& other) const;
};

// Single-pass leader clustering in input order: a point joins the first
// cluster whose current (running-mean) center lies within D/2, else founds
// a new cluster. Returned centers are the arithmetic means of their members,
// in cluster-founding order.
std::vector<Point> cluster_locations(const std::vector<Point>& points, double diameter);

LookupTables construct_grid_tables(const std::vector<LocatedSample>& samples,
                                   const BinSpec& bin, const GridSpec& grid);
LookupTables construct_continuous_tables(const std::vector<LocatedSample>& samples,
                                         const BinSpec& bin, double cluster_diameter);

void attach_antennas(LookupTables& t, const std::vector<Antenna>& antennas);

struct LaterationOptions {
    // Candidate-match tolerance T. Continuous mode defaults to 2*diameter;
    // grid mode ignores it (matching is exact grid-id equality).
    std::optional<double> tolerance;
    // Iteration stops once the candidates' max pairwise distance falls to
    // this value. Defaults: grid diagonal (grid mode), diameter (continuous).
    std::optional<double> spread_threshold;
    bool collect_candidates = false;
};

// Greedy intersection over the tables named by the query's readings,
// strongest first. Never scans the table set; ops counts cell probes.
LocationEstimate lookup_laterate(const Measurement& m, const LookupTables& t,
                                 const LaterationOptions& opts = {});

// Versioned line-text artifact; canonical (sorted) so identical tables
// serialize to identical bytes. '#' lines are comments.
void write_lookup_tables(std::ostream& out, const LookupTables& t);
LookupTables read_lookup_tables(std::istream& in);
void save_lookup_tables(const std::string& path, const LookupTables& t);
LookupTables load_lookup_tables(const std::string& path);

}  // namespace llgeo

#endif
