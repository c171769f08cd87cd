#ifndef LLGEO_EVAL_HPP
#define LLGEO_EVAL_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llgeo/baselines.hpp"
#include "llgeo/lookup.hpp"
#include "llgeo/scenario.hpp"

namespace llgeo {

struct SplitSpec {
    double train_fraction = 0.1;  // in (0,1)
    int repetitions = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
            throw ConfigError("train_fraction must be in (0,1)");
        if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    }
};

// Disjoint, exhaustive partition with |train| = round(fraction*n), drawn by
// a seeded shuffle; deterministic per (seed, rep). Both sides keep the input
// order of the surviving samples.
std::pair<std::vector<LocatedSample>, std::vector<LocatedSample>> split(
    const std::vector<LocatedSample>& samples, const SplitSpec& spec, int rep);

// Nearest-rank percentile: sorted ascending, 1-based rank ceil(p*n).
double error_percentile(std::vector<double> errors, double p);

// Fraction of data-bearing grids that contain at least one training sample.
double coverage(const std::vector<LocatedSample>& train,
                const std::vector<LocatedSample>& all_samples, const GridSpec& spec);

// Grid anchored at the dataset's bounding-box lower-left corner.
GridSpec dataset_grid(const std::vector<LocatedSample>& dataset, double cell);

enum class Method { LL, RFP, TL };

Method method_of(const std::string& name);
const char* to_string(Method m);

struct BenchConfig {
    std::vector<Method> methods;
    std::vector<double> grid_sizes;  // meters
    // LL bin sizes; empty means {1}. bins_explicit records whether the user
    // asked for bins, which is a config error combined with RFP or TL.
    std::vector<double> bin_sizes;
    bool bins_explicit = false;
    SplitSpec split;
    // Replay mode: train = test = the full dataset (no split); used by the
    // completeness/unambiguousness experiments that query training vectors.
    bool replay = false;
    std::size_t max_queries = 0;  // cap per repetition, 0 = all
    MeasurementDistanceKind distance = MeasurementDistanceKind::EuclideanSharedSupport;
    // Needed by TL (antennas + path-loss model) and used by LL for fallback
    // antenna positions when present.
    std::optional<Scenario> scenario;
    std::optional<double> tolerance;         // LL match tolerance override
    std::optional<double> spread_threshold;  // LL spread threshold override
    int threads = 1;

    void validate() const;
};

// One sweep cell: method x grid size x bin size, aggregated over reps.
struct CellReport {
    Method method = Method::LL;
    double grid_size = 0.0;
    double bin_size = 0.0;  // meaningful for LL only
    int repetitions = 0;
    std::size_t queries = 0;  // completed localizations across reps
    double err67_mean = 0.0, err67_std = 0.0;
    double err95_mean = 0.0, err95_std = 0.0;
    double mean_error_mean = 0.0, mean_error_std = 0.0;
    double relative_err67 = 0.0, relative_err95 = 0.0;  // err / grid size
    double coverage_mean = 0.0, coverage_std = 0.0;
    double mean_ops_per_query = 0.0;
    std::size_t no_information = 0;  // queries no method answer, across reps
    std::size_t insufficient = 0;    // queries below TL's observation floor
    std::vector<double> per_rep_err67, per_rep_err95, per_rep_mean_error;
    std::vector<double> cdf;  // pooled error percentiles at 0..100%
    double build_seconds_mean = 0.0;     // wall clock; timing sidecar only
    double query_seconds_per_query = 0.0;
};

struct BenchResult {
    std::vector<CellReport> cells;
};

BenchResult run_benchmark(const std::vector<LocatedSample>& dataset, const BenchConfig& cfg);

// CSV/JSON reports are canonical: same config and dataset give identical
// bytes regardless of thread count. Wall-clock numbers go exclusively to
// the timing sidecar, which is excluded from that guarantee.
void write_csv_report(std::ostream& out, const BenchResult& result);
void write_json_report(std::ostream& out, const BenchResult& result, const BenchConfig& cfg);
void write_timing_csv(std::ostream& out, const BenchResult& result);

}  // namespace llgeo

#endif
