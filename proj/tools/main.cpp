#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "llgeo/baselines.hpp"
#include "llgeo/dataset_io.hpp"
#include "llgeo/eval.hpp"
#include "llgeo/lookup.hpp"
#include "llgeo/scenario.hpp"
#include "llgeo/scenario_io.hpp"

namespace {

using llgeo::ConfigError;
using llgeo::format_double;
using nlohmann::json;

// Config file support: a flat JSON object whose keys are the long option
// names (without --); explicit flags win over file values. '#' comment
// lines are allowed.
json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw llgeo::IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    std::string stripped;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] == '#') continue;
        stripped += line;
        stripped += '\n';
    }
    try {
        json j = json::parse(stripped);
        if (!j.is_object()) throw ConfigError("config file must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw llgeo::ParseError(std::string("invalid config JSON: ") + e.what(), 0);
    }
}

struct ConfigBinding {
    CLI::Option* opt;
    std::function<void(const json&)> apply;
};

void apply_config(const json& j, const std::vector<ConfigBinding>& bindings) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto& b : bindings) {
            if (b.opt->get_lnames().empty() || b.opt->get_lnames()[0] != key) continue;
            known = true;
            if (b.opt->count() == 0) {
                try {
                    b.apply(value);
                } catch (const json::exception& e) {
                    throw ConfigError("config key '" + key + "': " + e.what());
                }
            }
            break;
        }
        if (!known) throw ConfigError("unknown config key: " + key);
    }
}

template <class T>
std::function<void(const json&)> set_to(T& target) {
    return [&target](const json& v) { target = v.get<T>(); };
}

llgeo::Measurement parse_query(const std::string& q) {
    if (q.empty()) throw ConfigError("query must be non-empty 'aid:rss[;aid:rss]*'");
    try {
        return llgeo::parse_readings(q);
    } catch (const llgeo::ParseError& e) {
        throw ConfigError(std::string("bad query: ") + e.what());
    }
}

llgeo::Sampling parse_sampling(long long samples, const std::string& grid_samples) {
    llgeo::Sampling sampling;
    if (samples > 0 && !grid_samples.empty())
        throw ConfigError("--samples and --grid-samples are mutually exclusive");
    if (samples > 0) {
        sampling.kind = llgeo::Sampling::Kind::UniformRandom;
        sampling.count = samples;
    } else if (!grid_samples.empty()) {
        const auto x = grid_samples.find('x');
        if (x == std::string::npos)
            throw ConfigError("expected --grid-samples as NXxNY, e.g. 100x100");
        sampling.kind = llgeo::Sampling::Kind::GridPoints;
        sampling.nx = llgeo::parse_int(grid_samples.substr(0, x), 0, "grid-samples nx");
        sampling.ny = llgeo::parse_int(grid_samples.substr(x + 1), 0, "grid-samples ny");
    } else {
        throw ConfigError("one of --samples or --grid-samples is required");
    }
    return sampling;
}

struct GenArgs {
    std::string config, scenario_path, out;
    long long samples = 0;
    std::string grid_samples;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int run_gen(const GenArgs& a) {
    llgeo::Scenario sc = llgeo::load_scenario(a.scenario_path);
    const llgeo::Sampling sampling = parse_sampling(a.samples, a.grid_samples);
    const std::uint64_t seed = a.seed_given ? a.seed : sc.rng_seed;
    const auto samples = llgeo::generate_dataset(sc, sampling, seed);
    llgeo::save_samples(a.out, samples);
    std::cout << "samples " << samples.size() << " extent "
              << format_double(sc.extent.xmin) << ' ' << format_double(sc.extent.ymin) << ' '
              << format_double(sc.extent.xmax) << ' ' << format_double(sc.extent.ymax)
              << '\n';
    return 0;
}

struct BuildArgs {
    std::string config, method, in, out, scenario_path, origin;
    double grid = 0.0;
    double bin = 1.0;
    bool bin_given = false;
    double diameter = 0.0;
    bool dump = false;
};

int run_build(const BuildArgs& a) {
    const auto samples = llgeo::load_samples(a.in);
    if (samples.empty()) throw ConfigError("input dataset has no usable samples");

    auto grid_spec_for = [&](double cell) {
        llgeo::GridSpec spec = llgeo::dataset_grid(samples, cell);
        if (!a.origin.empty()) {
            const auto comma = a.origin.find(',');
            if (comma == std::string::npos)
                throw ConfigError("expected --origin as 'x,y'");
            spec.origin =
                llgeo::Point(llgeo::parse_double(a.origin.substr(0, comma), 0, "origin x"),
                             llgeo::parse_double(a.origin.substr(comma + 1), 0, "origin y"));
        }
        return spec;
    };

    if (a.method == "ll") {
        if ((a.grid > 0.0) == (a.diameter > 0.0))
            throw ConfigError("method ll needs exactly one of --grid or --diameter");
        llgeo::LookupTables tables;
        if (a.grid > 0.0)
            tables = llgeo::construct_grid_tables(samples, llgeo::BinSpec{a.bin},
                                                  grid_spec_for(a.grid));
        else
            tables = llgeo::construct_continuous_tables(samples, llgeo::BinSpec{a.bin},
                                                        a.diameter);
        if (!a.scenario_path.empty()) {
            const llgeo::Scenario sc = llgeo::load_scenario(a.scenario_path);
            llgeo::attach_antennas(tables, sc.antennas);
        }
        llgeo::save_lookup_tables(a.out, tables);
        std::cout << "cells " << tables.cell_count() << '\n';
        if (a.dump) {
            if (tables.mode == llgeo::LookupTables::Mode::Grid) {
                for (const auto& [key, entries] : tables.grid_cells) {
                    std::cout << key.antenna << ',' << key.bin << " ->";
                    for (const auto& g : entries) std::cout << ' ' << g.ix << ',' << g.iy;
                    std::cout << '\n';
                }
            } else {
                for (const auto& [key, entries] : tables.point_cells) {
                    std::cout << key.antenna << ',' << key.bin << " ->";
                    for (const auto& p : entries)
                        std::cout << ' ' << format_double(p.x()) << ','
                                  << format_double(p.y());
                    std::cout << '\n';
                }
            }
        }
        return 0;
    }
    if (a.method == "rfp") {
        if (a.bin_given) throw ConfigError("--bin applies to method ll only");
        if (!(a.grid > 0.0)) throw ConfigError("method rfp needs --grid");
        const auto index = llgeo::build_rfp_index(samples, grid_spec_for(a.grid));
        llgeo::save_rfp_index(a.out, index);
        std::cout << "grids " << index.grids.size() << '\n';
        if (a.dump) {
            for (const auto& [gid, means] : index.grids) {
                std::cout << gid.ix << ',' << gid.iy << " ->";
                for (const auto& [aid, st] : means)
                    std::cout << ' ' << aid << ':' << format_double(st.mean) << ':'
                              << st.count;
                std::cout << '\n';
            }
        }
        return 0;
    }
    throw ConfigError("build supports --method ll|rfp, got '" + a.method + "'");
}

struct LocalizeArgs {
    std::string config, method, artifact, scenario_path, query;
    double tolerance = -1.0;
    double spread = -1.0;
};

int run_localize(const LocalizeArgs& a) {
    const llgeo::Measurement q = parse_query(a.query);
    llgeo::LocationEstimate est;
    if (a.method == "ll") {
        if (a.artifact.empty()) throw ConfigError("method ll needs --artifact");
        const auto tables = llgeo::load_lookup_tables(a.artifact);
        llgeo::LaterationOptions opts;
        if (a.tolerance >= 0.0) opts.tolerance = a.tolerance;
        if (a.spread >= 0.0) opts.spread_threshold = a.spread;
        est = llgeo::lookup_laterate(q, tables, opts);
    } else if (a.method == "rfp") {
        if (a.artifact.empty()) throw ConfigError("method rfp needs --artifact");
        const auto index = llgeo::load_rfp_index(a.artifact);
        est = llgeo::rfp_localize(q, index);
    } else if (a.method == "tl") {
        if (a.scenario_path.empty()) throw ConfigError("method tl needs --scenario");
        const llgeo::Scenario sc = llgeo::load_scenario(a.scenario_path);
        est = llgeo::tl_localize(q, sc.antennas, sc.model);
    } else {
        throw ConfigError("localize supports --method ll|rfp|tl, got '" + a.method + "'");
    }
    std::cout << format_double(est.position.x()) << ' ' << format_double(est.position.y())
              << ' ' << llgeo::to_string(est.status) << '\n';
    return est.status == llgeo::EstimateStatus::FallbackDefault ? 3 : 0;
}

struct BenchArgs {
    std::string config, data, scenario_path, out_prefix = "bench";
    long long samples = 0;
    std::string grid_samples;
    std::uint64_t gen_seed = 0;
    bool gen_seed_given = false;
    std::vector<std::string> methods;
    std::vector<double> grids;
    std::vector<double> bins;
    double train_frac = 0.1;
    int reps = 1;
    std::uint64_t seed = 0;
    bool replay = false;
    long long max_queries = 0;
    std::string distance = "euclidean";
    double tolerance = -1.0;
    double spread = -1.0;
    int threads = 1;
};

int run_bench(const BenchArgs& a) {
    if (a.methods.empty()) throw ConfigError("--methods is required");
    if (a.grids.empty()) throw ConfigError("--grids is required");

    std::optional<llgeo::Scenario> scenario;
    if (!a.scenario_path.empty()) scenario = llgeo::load_scenario(a.scenario_path);

    std::vector<llgeo::LocatedSample> dataset;
    if (!a.data.empty()) {
        dataset = llgeo::load_samples(a.data);
    } else if (scenario) {
        const llgeo::Sampling sampling = parse_sampling(a.samples, a.grid_samples);
        const std::uint64_t seed = a.gen_seed_given ? a.gen_seed : scenario->rng_seed;
        dataset = llgeo::generate_dataset(*scenario, sampling, seed);
    } else {
        throw ConfigError("bench needs --data or --scenario");
    }

    llgeo::BenchConfig cfg;
    for (const auto& m : a.methods) cfg.methods.push_back(llgeo::method_of(m));
    cfg.grid_sizes = a.grids;
    cfg.bin_sizes = a.bins;
    cfg.bins_explicit = !a.bins.empty();
    cfg.split.train_fraction = a.train_frac;
    cfg.split.repetitions = a.reps;
    cfg.split.seed = a.seed;
    cfg.replay = a.replay;
    cfg.max_queries = static_cast<std::size_t>(a.max_queries);
    cfg.distance = llgeo::distance_kind_of(a.distance);
    cfg.scenario = scenario;
    if (a.tolerance >= 0.0) cfg.tolerance = a.tolerance;
    if (a.spread >= 0.0) cfg.spread_threshold = a.spread;
    cfg.threads = a.threads;

    const llgeo::BenchResult result = llgeo::run_benchmark(dataset, cfg);

    {
        std::ofstream csv(a.out_prefix + ".csv", std::ios::binary);
        if (!csv) throw llgeo::IoError("cannot open " + a.out_prefix + ".csv");
        llgeo::write_csv_report(csv, result);
    }
    {
        std::ofstream js(a.out_prefix + ".json", std::ios::binary);
        if (!js) throw llgeo::IoError("cannot open " + a.out_prefix + ".json");
        llgeo::write_json_report(js, result, cfg);
    }
    {
        std::ofstream tc(a.out_prefix + "_timing.csv", std::ios::binary);
        if (!tc) throw llgeo::IoError("cannot open " + a.out_prefix + "_timing.csv");
        llgeo::write_timing_csv(tc, result);
    }

    std::cout << std::left << std::setw(6) << "method" << std::right << std::setw(8)
              << "grid_m" << std::setw(6) << "bin" << std::setw(12) << "err67_m"
              << std::setw(12) << "err95_m" << std::setw(10) << "coverage" << std::setw(14)
              << "query_us" << '\n';
    for (const auto& c : result.cells) {
        std::ostringstream bin;
        if (c.method == llgeo::Method::LL) bin << c.bin_size;
        std::cout << std::left << std::setw(6) << llgeo::to_string(c.method) << std::right
                  << std::setw(8) << c.grid_size << std::setw(6) << bin.str() << std::setw(12)
                  << std::fixed << std::setprecision(2) << c.err67_mean << std::setw(12)
                  << c.err95_mean << std::setw(10) << std::setprecision(3) << c.coverage_mean
                  << std::setw(14) << std::setprecision(1)
                  << c.query_seconds_per_query * 1e6 << '\n';
        std::cout.unsetf(std::ios::fixed);
        std::cout << std::setprecision(6);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lookup-table lateration toolkit: dataset generation, index "
                 "construction, localization, benchmarking"};
    app.require_subcommand(1);

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic sample file");
    auto* gen_config = gen->add_option("--config", gen_args.config, "JSON config file");
    auto* gen_scenario =
        gen->add_option("--scenario", gen_args.scenario_path, "Scenario JSON file");
    auto* gen_samples = gen->add_option("--samples", gen_args.samples,
                                        "Number of uniform-random samples")
                            ->check(CLI::PositiveNumber);
    auto* gen_grid_samples = gen->add_option("--grid-samples", gen_args.grid_samples,
                                             "Grid sampling as NXxNY, e.g. 100x100");
    auto* gen_seed = gen->add_option("--seed", gen_args.seed,
                                     "Dataset seed (default: scenario rng_seed)");
    auto* gen_out = gen->add_option("--out", gen_args.out, "Output sample file");

    BuildArgs build_args;
    auto* build = app.add_subcommand("build", "Build lookup tables or an RFP index");
    auto* build_config = build->add_option("--config", build_args.config, "JSON config file");
    auto* build_method = build->add_option("--method", build_args.method, "ll or rfp");
    auto* build_in = build->add_option("--in", build_args.in, "Input sample file");
    auto* build_out = build->add_option("--out", build_args.out, "Output artifact path");
    auto* build_grid =
        build->add_option("--grid", build_args.grid, "Grid cell size in meters")
            ->check(CLI::PositiveNumber);
    auto* build_bin = build->add_option("--bin", build_args.bin, "RSS bin size (ll only)")
                          ->check(CLI::PositiveNumber);
    auto* build_diameter = build->add_option("--diameter", build_args.diameter,
                                             "Cluster diameter for continuous-mode ll")
                               ->check(CLI::PositiveNumber);
    auto* build_scenario = build->add_option(
        "--scenario", build_args.scenario_path,
        "Scenario JSON; embeds antenna positions for the ll fallback");
    auto* build_origin = build->add_option(
        "--origin", build_args.origin,
        "Grid origin as 'x,y' (default: dataset bounding-box lower-left)");
    auto* build_dump =
        build->add_flag("--dump", build_args.dump, "Print the full cell listing");

    LocalizeArgs loc_args;
    auto* loc = app.add_subcommand("localize", "Localize a single query measurement");
    auto* loc_config = loc->add_option("--config", loc_args.config, "JSON config file");
    auto* loc_method = loc->add_option("--method", loc_args.method, "ll, rfp, or tl");
    auto* loc_artifact =
        loc->add_option("--artifact", loc_args.artifact, "Built tables/index artifact");
    auto* loc_scenario =
        loc->add_option("--scenario", loc_args.scenario_path, "Scenario JSON (tl)");
    auto* loc_q = loc->add_option("--q", loc_args.query, "Query readings 'aid:rss[;...]'");
    auto* loc_tol = loc->add_option("--tolerance", loc_args.tolerance,
                                    "Candidate match tolerance in meters (ll)");
    auto* loc_spread = loc->add_option("--spread", loc_args.spread,
                                       "Spread threshold in meters (ll)");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Run a benchmark sweep and write reports");
    auto* bench_config = bench->add_option("--config", bench_args.config, "JSON config file");
    auto* bench_data = bench->add_option("--data", bench_args.data, "Input sample file");
    auto* bench_scenario = bench->add_option("--scenario", bench_args.scenario_path,
                                             "Scenario JSON (generate or TL/fallback)");
    auto* bench_samples = bench->add_option("--samples", bench_args.samples,
                                            "Generate this many random samples")
                              ->check(CLI::PositiveNumber);
    auto* bench_grid_samples =
        bench->add_option("--grid-samples", bench_args.grid_samples, "Grid sampling NXxNY");
    auto* bench_gen_seed =
        bench->add_option("--gen-seed", bench_args.gen_seed, "Dataset generation seed");
    auto* bench_methods = bench->add_option("--methods", bench_args.methods,
                                            "Comma-separated: ll,rfp,tl")
                              ->delimiter(',');
    auto* bench_grids =
        bench->add_option("--grids", bench_args.grids, "Comma-separated grid sizes in meters")
            ->delimiter(',');
    auto* bench_bins =
        bench->add_option("--bins", bench_args.bins, "Comma-separated LL bin sizes")
            ->delimiter(',');
    auto* bench_train = bench->add_option("--train-frac", bench_args.train_frac,
                                          "Training fraction in (0,1)");
    auto* bench_reps = bench->add_option("--reps", bench_args.reps, "Split repetitions")
                           ->check(CLI::PositiveNumber);
    auto* bench_seed = bench->add_option("--seed", bench_args.seed, "Split seed");
    auto* bench_replay = bench->add_flag("--replay", bench_args.replay,
                                         "Replay mode: train = test = full dataset");
    auto* bench_maxq = bench->add_option("--max-queries", bench_args.max_queries,
                                         "Cap test queries per repetition (0 = all)")
                           ->check(CLI::NonNegativeNumber);
    auto* bench_distance = bench->add_option("--distance", bench_args.distance,
                                             "RFP distance: euclidean or cosine");
    auto* bench_tol = bench->add_option("--tolerance", bench_args.tolerance,
                                        "LL candidate match tolerance in meters");
    auto* bench_spread = bench->add_option("--spread", bench_args.spread,
                                           "LL spread threshold in meters");
    auto* bench_threads =
        bench->add_option("--threads", bench_args.threads, "Worker threads")
            ->check(CLI::PositiveNumber);
    auto* bench_out =
        bench->add_option("--out-prefix", bench_args.out_prefix,
                          "Report path prefix (.csv, .json, _timing.csv appended)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) {
            if (gen_config->count()) {
                const json j = load_config_file(gen_args.config);
                apply_config(j, {{gen_scenario, set_to(gen_args.scenario_path)},
                                 {gen_samples, set_to(gen_args.samples)},
                                 {gen_grid_samples, set_to(gen_args.grid_samples)},
                                 {gen_seed, set_to(gen_args.seed)},
                                 {gen_out, set_to(gen_args.out)},
                                 {gen_config, [](const json&) {}}});
                if (j.contains("seed")) gen_args.seed_given = true;
            }
            gen_args.seed_given = gen_args.seed_given || gen_seed->count() > 0;
            if (gen_args.scenario_path.empty()) throw ConfigError("--scenario is required");
            if (gen_args.out.empty()) throw ConfigError("--out is required");
            return run_gen(gen_args);
        }
        if (build->parsed()) {
            if (build_config->count()) {
                const json j = load_config_file(build_args.config);
                apply_config(j, {{build_method, set_to(build_args.method)},
                                 {build_in, set_to(build_args.in)},
                                 {build_out, set_to(build_args.out)},
                                 {build_grid, set_to(build_args.grid)},
                                 {build_bin, set_to(build_args.bin)},
                                 {build_diameter, set_to(build_args.diameter)},
                                 {build_scenario, set_to(build_args.scenario_path)},
                                 {build_origin, set_to(build_args.origin)},
                                 {build_dump, set_to(build_args.dump)},
                                 {build_config, [](const json&) {}}});
                if (j.contains("bin")) build_args.bin_given = true;
            }
            build_args.bin_given = build_args.bin_given || build_bin->count() > 0;
            if (build_args.method.empty()) throw ConfigError("--method is required");
            if (build_args.in.empty()) throw ConfigError("--in is required");
            if (build_args.out.empty()) throw ConfigError("--out is required");
            return run_build(build_args);
        }
        if (loc->parsed()) {
            if (loc_config->count()) {
                const json j = load_config_file(loc_args.config);
                apply_config(j, {{loc_method, set_to(loc_args.method)},
                                 {loc_artifact, set_to(loc_args.artifact)},
                                 {loc_scenario, set_to(loc_args.scenario_path)},
                                 {loc_q, set_to(loc_args.query)},
                                 {loc_tol, set_to(loc_args.tolerance)},
                                 {loc_spread, set_to(loc_args.spread)},
                                 {loc_config, [](const json&) {}}});
            }
            if (loc_args.method.empty()) throw ConfigError("--method is required");
            if (loc_q->count() == 0 && loc_args.query.empty())
                throw ConfigError("--q is required");
            return run_localize(loc_args);
        }
        if (bench->parsed()) {
            if (bench_config->count()) {
                const json j = load_config_file(bench_args.config);
                apply_config(j, {{bench_data, set_to(bench_args.data)},
                                 {bench_scenario, set_to(bench_args.scenario_path)},
                                 {bench_samples, set_to(bench_args.samples)},
                                 {bench_grid_samples, set_to(bench_args.grid_samples)},
                                 {bench_gen_seed, set_to(bench_args.gen_seed)},
                                 {bench_methods, set_to(bench_args.methods)},
                                 {bench_grids, set_to(bench_args.grids)},
                                 {bench_bins, set_to(bench_args.bins)},
                                 {bench_train, set_to(bench_args.train_frac)},
                                 {bench_reps, set_to(bench_args.reps)},
                                 {bench_seed, set_to(bench_args.seed)},
                                 {bench_replay, set_to(bench_args.replay)},
                                 {bench_maxq, set_to(bench_args.max_queries)},
                                 {bench_distance, set_to(bench_args.distance)},
                                 {bench_tol, set_to(bench_args.tolerance)},
                                 {bench_spread, set_to(bench_args.spread)},
                                 {bench_threads, set_to(bench_args.threads)},
                                 {bench_out, set_to(bench_args.out_prefix)},
                                 {bench_config, [](const json&) {}}});
                if (j.contains("gen-seed")) bench_args.gen_seed_given = true;
            }
            bench_args.gen_seed_given =
                bench_args.gen_seed_given || bench_gen_seed->count() > 0;
            return run_bench(bench_args);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const llgeo::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const llgeo::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const llgeo::NoInformationError& e) {
        std::cerr << "no information: " << e.what() << '\n';
        return 3;
    } catch (const llgeo::InsufficientObservationsError& e) {
        std::cerr << "insufficient observations: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
