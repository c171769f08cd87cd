#include "llgeo/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include <json.hpp>

namespace llgeo {

std::pair<std::vector<LocatedSample>, std::vector<LocatedSample>> split(
    const std::vector<LocatedSample>& samples, const SplitSpec& spec, int rep) {
    spec.validate();
    const std::size_t n = samples.size();
    if (n < 2) throw ConfigError("need at least 2 samples to split");
    const auto k = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(n)));
    if (k < 1 || k >= n)
        throw ConfigError("train_fraction leaves an empty train or test set");

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 gen(mix_seed(spec.seed, static_cast<std::uint64_t>(rep)));
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = gen() % (i + 1);
        std::swap(idx[i], idx[j]);
    }
    std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + static_cast<long>(k));
    std::vector<std::size_t> test_idx(idx.begin() + static_cast<long>(k), idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    std::pair<std::vector<LocatedSample>, std::vector<LocatedSample>> out;
    out.first.reserve(k);
    out.second.reserve(n - k);
    for (auto i : train_idx) out.first.push_back(samples[i]);
    for (auto i : test_idx) out.second.push_back(samples[i]);
    return out;
}

double error_percentile(std::vector<double> errors, double p) {
    if (errors.empty()) throw ConfigError("percentile of an empty error list");
    if (!(p > 0.0) || !(p <= 1.0)) throw ConfigError("percentile fraction must be in (0,1]");
    std::sort(errors.begin(), errors.end());
    const auto n = static_cast<double>(errors.size());
    // The -1e-9 slack keeps ranks like 0.67*100 (= 67.000000000000004 in
    // binary) from spilling over to the next rank.
    auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, errors.size());
    return errors[rank - 1];
}

double coverage(const std::vector<LocatedSample>& train,
                const std::vector<LocatedSample>& all_samples, const GridSpec& spec) {
    if (all_samples.empty()) throw ConfigError("coverage of an empty dataset");
    std::set<GridId> data_grids;
    for (const auto& s : all_samples) data_grids.insert(grid_of(s.position, spec));
    std::set<GridId> train_grids;
    for (const auto& s : train) train_grids.insert(grid_of(s.position, spec));
    return static_cast<double>(train_grids.size()) / static_cast<double>(data_grids.size());
}

GridSpec dataset_grid(const std::vector<LocatedSample>& dataset, double cell) {
    GridSpec spec;
    spec.cell_size = cell;
    if (dataset.empty()) return spec;
    double xmin = dataset[0].position.x(), ymin = dataset[0].position.y();
    for (const auto& s : dataset) {
        xmin = std::min(xmin, s.position.x());
        ymin = std::min(ymin, s.position.y());
    }
    spec.origin = Point(xmin, ymin);
    return spec;
}

Method method_of(const std::string& name) {
    if (name == "ll") return Method::LL;
    if (name == "rfp") return Method::RFP;
    if (name == "tl") return Method::TL;
    throw ConfigError("unknown method: " + name + " (expected ll|rfp|tl)");
}

const char* to_string(Method m) {
    switch (m) {
        case Method::LL: return "ll";
        case Method::RFP: return "rfp";
        case Method::TL: return "tl";
    }
    return "unknown";
}

void BenchConfig::validate() const {
    if (methods.empty()) throw ConfigError("at least one method required");
    if (grid_sizes.empty()) throw ConfigError("at least one grid size required");
    for (double g : grid_sizes)
        if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("grid sizes must be positive");
    for (double b : bin_sizes)
        if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("bin sizes must be positive");
    const bool has_non_ll = std::any_of(methods.begin(), methods.end(),
                                        [](Method m) { return m != Method::LL; });
    if (bins_explicit && has_non_ll)
        throw ConfigError("--bins applies to ll only; drop rfp/tl from --methods");
    const bool has_tl =
        std::any_of(methods.begin(), methods.end(), [](Method m) { return m == Method::TL; });
    if (has_tl && !scenario)
        throw ConfigError("method tl needs a scenario (antenna positions and model)");
    if (!replay) split.validate();
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

namespace {

struct SweepCell {
    Method method;
    double grid_size;
    double bin_size;
};

struct RepOutcome {
    std::vector<double> errors;
    double cov = 0.0;
    std::size_t ops = 0;
    std::size_t no_information = 0;
    std::size_t insufficient = 0;
    double build_seconds = 0.0;
    double query_seconds = 0.0;
};

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : s / static_cast<double>(v.size());
}

// Population standard deviation: well-defined for a single repetition.
double std_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

RepOutcome run_rep(const std::vector<LocatedSample>& dataset, const BenchConfig& cfg,
                   const SweepCell& cell, int rep) {
    using clock = std::chrono::steady_clock;
    RepOutcome out;

    std::vector<LocatedSample> train_store, test_store;
    const std::vector<LocatedSample>* train = &dataset;
    const std::vector<LocatedSample>* test = &dataset;
    if (!cfg.replay) {
        auto parts = split(dataset, cfg.split, rep);
        train_store = std::move(parts.first);
        test_store = std::move(parts.second);
        train = &train_store;
        test = &test_store;
    }

    const GridSpec grid = dataset_grid(dataset, cell.grid_size);
    out.cov = coverage(*train, dataset, grid);

    LookupTables tables;
    RfpIndex index;
    const auto build_start = clock::now();
    if (cell.method == Method::LL) {
        tables = construct_grid_tables(*train, BinSpec{cell.bin_size}, grid);
        if (cfg.scenario) attach_antennas(tables, cfg.scenario->antennas);
    } else if (cell.method == Method::RFP) {
        index = build_rfp_index(*train, grid);
    }
    out.build_seconds = std::chrono::duration<double>(clock::now() - build_start).count();

    LaterationOptions ll_opts;
    ll_opts.tolerance = cfg.tolerance;
    ll_opts.spread_threshold = cfg.spread_threshold;

    std::size_t n_queries = test->size();
    if (cfg.max_queries > 0) n_queries = std::min(n_queries, cfg.max_queries);

    const auto query_start = clock::now();
    for (std::size_t i = 0; i < n_queries; ++i) {
        const auto& q = (*test)[i];
        try {
            LocationEstimate est;
            switch (cell.method) {
                case Method::LL: est = lookup_laterate(q.measurement, tables, ll_opts); break;
                case Method::RFP: est = rfp_localize(q.measurement, index, cfg.distance); break;
                case Method::TL:
                    est = tl_localize(q.measurement, cfg.scenario->antennas,
                                      cfg.scenario->model);
                    break;
            }
            out.errors.push_back((est.position - q.position).norm());
            out.ops += est.ops;
        } catch (const NoInformationError&) {
            ++out.no_information;
        } catch (const InsufficientObservationsError&) {
            ++out.insufficient;
        }
    }
    out.query_seconds = std::chrono::duration<double>(clock::now() - query_start).count();
    return out;
}

}  // namespace

BenchResult run_benchmark(const std::vector<LocatedSample>& dataset, const BenchConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) throw ConfigError("benchmark dataset is empty");

    std::vector<double> ll_bins = cfg.bin_sizes.empty() ? std::vector<double>{1.0}
                                                        : cfg.bin_sizes;
    std::vector<SweepCell> cells;
    for (Method m : cfg.methods)
        for (double g : cfg.grid_sizes) {
            if (m == Method::LL)
                for (double b : ll_bins) cells.push_back(SweepCell{m, g, b});
            else
                cells.push_back(SweepCell{m, g, 1.0});
        }

    const int reps = cfg.replay ? std::max(1, cfg.split.repetitions) : cfg.split.repetitions;
    struct WorkItem {
        std::size_t cell;
        int rep;
    };
    std::vector<WorkItem> items;
    items.reserve(cells.size() * static_cast<std::size_t>(reps));
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (int r = 0; r < reps; ++r) items.push_back(WorkItem{c, r});

    std::vector<std::vector<RepOutcome>> outcomes(cells.size());
    for (auto& v : outcomes) v.resize(static_cast<std::size_t>(reps));

    const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads),
                                                 std::max<std::size_t>(items.size(), 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= items.size()) return;
            try {
                outcomes[items[i].cell][static_cast<std::size_t>(items[i].rep)] =
                    run_rep(dataset, cfg, cells[items[i].cell], items[i].rep);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(items.size());
                return;
            }
        }
    };
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    BenchResult result;
    result.cells.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& reps_out = outcomes[c];
        CellReport rep;
        rep.method = cells[c].method;
        rep.grid_size = cells[c].grid_size;
        rep.bin_size = cells[c].bin_size;
        rep.repetitions = reps;

        std::vector<double> covs, builds, query_means, ops_means;
        std::vector<double> pooled;
        for (const auto& o : reps_out) {
            rep.queries += o.errors.size();
            rep.no_information += o.no_information;
            rep.insufficient += o.insufficient;
            covs.push_back(o.cov);
            builds.push_back(o.build_seconds);
            if (!o.errors.empty()) {
                rep.per_rep_err67.push_back(error_percentile(o.errors, 0.67));
                rep.per_rep_err95.push_back(error_percentile(o.errors, 0.95));
                rep.per_rep_mean_error.push_back(mean_of(o.errors));
                query_means.push_back(o.query_seconds /
                                      static_cast<double>(o.errors.size()));
                ops_means.push_back(static_cast<double>(o.ops) /
                                    static_cast<double>(o.errors.size()));
                pooled.insert(pooled.end(), o.errors.begin(), o.errors.end());
            }
        }
        rep.err67_mean = mean_of(rep.per_rep_err67);
        rep.err67_std = std_of(rep.per_rep_err67);
        rep.err95_mean = mean_of(rep.per_rep_err95);
        rep.err95_std = std_of(rep.per_rep_err95);
        rep.mean_error_mean = mean_of(rep.per_rep_mean_error);
        rep.mean_error_std = std_of(rep.per_rep_mean_error);
        rep.relative_err67 = rep.err67_mean / cells[c].grid_size;
        rep.relative_err95 = rep.err95_mean / cells[c].grid_size;
        rep.coverage_mean = mean_of(covs);
        rep.coverage_std = std_of(covs);
        rep.mean_ops_per_query = mean_of(ops_means);
        rep.build_seconds_mean = mean_of(builds);
        rep.query_seconds_per_query = mean_of(query_means);
        if (!pooled.empty()) {
            std::sort(pooled.begin(), pooled.end());
            rep.cdf.resize(101);
            rep.cdf[0] = pooled.front();
            for (int k = 1; k <= 100; ++k) {
                auto rank = static_cast<std::size_t>(
                    std::ceil(static_cast<double>(k) / 100.0 *
                                  static_cast<double>(pooled.size()) -
                              1e-9));
                rank = std::clamp<std::size_t>(rank, 1, pooled.size());
                rep.cdf[static_cast<std::size_t>(k)] = pooled[rank - 1];
            }
        }
        result.cells.push_back(std::move(rep));
    }
    return result;
}

namespace {

std::string csv_bin(const CellReport& c) {
    return c.method == Method::LL ? format_double(c.bin_size) : std::string();
}

}  // namespace

void write_csv_report(std::ostream& out, const BenchResult& result) {
    out << "method,grid_size_m,bin_size,repetitions,queries,err67_m,err67_std,err95_m,"
           "err95_std,mean_error_m,mean_error_std,relative_err67,relative_err95,coverage,"
           "coverage_std,mean_ops_per_query,no_information,insufficient\n";
    for (const auto& c : result.cells) {
        out << to_string(c.method) << ',' << format_double(c.grid_size) << ',' << csv_bin(c)
            << ',' << c.repetitions << ',' << c.queries << ',' << format_double(c.err67_mean)
            << ',' << format_double(c.err67_std) << ',' << format_double(c.err95_mean) << ','
            << format_double(c.err95_std) << ',' << format_double(c.mean_error_mean) << ','
            << format_double(c.mean_error_std) << ',' << format_double(c.relative_err67)
            << ',' << format_double(c.relative_err95) << ',' << format_double(c.coverage_mean)
            << ',' << format_double(c.coverage_std) << ','
            << format_double(c.mean_ops_per_query) << ',' << c.no_information << ','
            << c.insufficient << '\n';
    }
}

void write_json_report(std::ostream& out, const BenchResult& result, const BenchConfig& cfg) {
    using nlohmann::json;
    json j;
    // Effective experiment config (provenance). Thread count is execution
    // detail, not experiment identity, and is deliberately not echoed: the
    // report must be identical for any --threads value.
    json jc;
    jc["methods"] = json::array();
    for (Method m : cfg.methods) jc["methods"].push_back(to_string(m));
    jc["grid_sizes"] = cfg.grid_sizes;
    if (!cfg.bin_sizes.empty()) jc["bin_sizes"] = cfg.bin_sizes;
    jc["distance"] = to_string(cfg.distance);
    jc["replay"] = cfg.replay;
    if (!cfg.replay) {
        jc["train_fraction"] = cfg.split.train_fraction;
        jc["seed"] = cfg.split.seed;
    }
    jc["repetitions"] = cfg.replay ? std::max(1, cfg.split.repetitions)
                                   : cfg.split.repetitions;
    if (cfg.max_queries > 0) jc["max_queries"] = cfg.max_queries;
    if (cfg.tolerance) jc["tolerance"] = *cfg.tolerance;
    if (cfg.spread_threshold) jc["spread_threshold"] = *cfg.spread_threshold;
    jc["percentile_definition"] = "nearest-rank";
    j["config"] = jc;

    j["cells"] = json::array();
    for (const auto& c : result.cells) {
        json cell;
        cell["method"] = to_string(c.method);
        cell["grid_size_m"] = c.grid_size;
        if (c.method == Method::LL) cell["bin_size"] = c.bin_size;
        cell["repetitions"] = c.repetitions;
        cell["queries"] = c.queries;
        cell["err67_m"] = {{"mean", c.err67_mean}, {"std", c.err67_std}};
        cell["err95_m"] = {{"mean", c.err95_mean}, {"std", c.err95_std}};
        cell["mean_error_m"] = {{"mean", c.mean_error_mean}, {"std", c.mean_error_std}};
        cell["relative_err67"] = c.relative_err67;
        cell["relative_err95"] = c.relative_err95;
        cell["coverage"] = {{"mean", c.coverage_mean}, {"std", c.coverage_std}};
        cell["mean_ops_per_query"] = c.mean_ops_per_query;
        cell["no_information"] = c.no_information;
        cell["insufficient"] = c.insufficient;
        cell["per_rep"] = {{"err67_m", c.per_rep_err67},
                           {"err95_m", c.per_rep_err95},
                           {"mean_error_m", c.per_rep_mean_error}};
        cell["cdf_m"] = c.cdf;
        j["cells"].push_back(cell);
    }
    out << j.dump(2) << '\n';
}

void write_timing_csv(std::ostream& out, const BenchResult& result) {
    out << "method,grid_size_m,bin_size,build_seconds_mean,query_seconds_per_query\n";
    for (const auto& c : result.cells) {
        out << to_string(c.method) << ',' << format_double(c.grid_size) << ',' << csv_bin(c)
            << ',' << format_double(c.build_seconds_mean) << ','
            << format_double(c.query_seconds_per_query) << '\n';
    }
}

}  // namespace llgeo
