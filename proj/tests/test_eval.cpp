#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "llgeo/eval.hpp"
#include "fixtures.hpp"

using namespace llgeo;

namespace {

std::vector<LocatedSample> numbered_samples(std::size_t n) {
    std::vector<LocatedSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].id = static_cast<std::int64_t>(i) + 1;
        out[i].position = Point(static_cast<double>(i), 0.0);
        out[i].measurement.readings[1] = -50.0;
    }
    return out;
}

std::set<std::int64_t> ids_of(const std::vector<LocatedSample>& samples) {
    std::set<std::int64_t> out;
    for (const auto& s : samples) out.insert(s.id);
    return out;
}

}  // namespace

TEST_CASE("split partitions deterministically") {
    const auto samples = numbered_samples(1000);
    SplitSpec spec;
    spec.train_fraction = 0.1;
    spec.seed = 77;

    const auto [train, test] = split(samples, spec, 0);
    CHECK(train.size() == 100);
    CHECK(test.size() == 900);

    // Disjoint and exhaustive.
    auto train_ids = ids_of(train), test_ids = ids_of(test);
    CHECK(train_ids.size() == 100);
    CHECK(test_ids.size() == 900);
    std::set<std::int64_t> all;
    all.insert(train_ids.begin(), train_ids.end());
    all.insert(test_ids.begin(), test_ids.end());
    CHECK(all.size() == 1000);

    // Both sides preserve the input (ascending-id) order.
    CHECK(std::is_sorted(train.begin(), train.end(),
                         [](const auto& a, const auto& b) { return a.id < b.id; }));
    CHECK(std::is_sorted(test.begin(), test.end(),
                         [](const auto& a, const auto& b) { return a.id < b.id; }));

    // Same (seed, rep) reproduces; another rep redraws.
    const auto [train2, test2] = split(samples, spec, 0);
    CHECK(ids_of(train2) == train_ids);
    const auto [train3, test3] = split(samples, spec, 1);
    CHECK(ids_of(train3) != train_ids);
}

TEST_CASE("split rejects degenerate partitions") {
    const auto ten = numbered_samples(10);
    SplitSpec spec;
    spec.train_fraction = 0.05;  // rounds to one training sample
    CHECK(split(ten, spec, 0).first.size() == 1);

    spec.train_fraction = 0.01;  // rounds to zero
    CHECK_THROWS_AS(split(ten, spec, 0), ConfigError);
    spec.train_fraction = 0.99;  // rounds to all ten
    CHECK_THROWS_AS(split(ten, spec, 0), ConfigError);

    spec.train_fraction = 0.5;
    CHECK_THROWS_AS(split(numbered_samples(1), spec, 0), ConfigError);
    spec.train_fraction = 1.5;
    CHECK_THROWS_AS(split(ten, spec, 0), ConfigError);
    spec.train_fraction = 0.5;
    spec.repetitions = 0;
    CHECK_THROWS_AS(split(ten, spec, 0), ConfigError);
}

TEST_CASE("nearest-rank percentiles") {
    std::vector<double> century;
    for (int i = 1; i <= 100; ++i) century.push_back(static_cast<double>(i));
    CHECK(error_percentile(century, 0.67) == 67.0);
    CHECK(error_percentile(century, 0.95) == 95.0);
    CHECK(error_percentile(century, 1.0) == 100.0);
    CHECK(error_percentile(century, 0.001) == 1.0);

    CHECK(error_percentile({42.0}, 0.67) == 42.0);
    CHECK(error_percentile({42.0}, 0.95) == 42.0);
    CHECK(error_percentile({1.0, 2.0, 3.0}, 0.5) == 2.0);
    CHECK(error_percentile({3.0, 1.0, 2.0}, 1.0) == 3.0);  // input order is free

    CHECK_THROWS_AS(error_percentile({}, 0.5), ConfigError);
    CHECK_THROWS_AS(error_percentile({1.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(error_percentile({1.0}, 1.5), ConfigError);
}

TEST_CASE("coverage counts data-bearing grids only") {
    const GridSpec spec{Point(0.0, 0.0), 10.0};
    std::vector<LocatedSample> all(4);
    all[0].position = Point(5.0, 5.0);    // grid (0,0)
    all[1].position = Point(15.0, 5.0);   // grid (1,0)
    all[2].position = Point(5.0, 15.0);   // grid (0,1)
    all[3].position = Point(15.0, 15.0);  // grid (1,1)

    CHECK(coverage({all[0]}, all, spec) == 0.25);
    CHECK(coverage(all, all, spec) == 1.0);
    CHECK(coverage({}, all, spec) == 0.0);
    // Two training samples in one grid still cover one grid.
    CHECK(coverage({all[0], all[0]}, all, spec) == 0.25);
    CHECK_THROWS_AS(coverage(all, {}, spec), ConfigError);
}

TEST_CASE("dataset grid anchors at the bounding-box corner") {
    std::vector<LocatedSample> samples(2);
    samples[0].position = Point(5.0, 9.0);
    samples[1].position = Point(3.0, 12.0);
    const GridSpec spec = dataset_grid(samples, 10.0);
    CHECK(spec.origin == Point(3.0, 9.0));
    CHECK(spec.cell_size == 10.0);

    CHECK(method_of("ll") == Method::LL);
    CHECK(method_of("rfp") == Method::RFP);
    CHECK(method_of("tl") == Method::TL);
    CHECK_THROWS_AS(method_of("knn"), ConfigError);
}

TEST_CASE("benchmark configs are validated") {
    BenchConfig cfg;
    cfg.grid_sizes = {10.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no methods

    cfg.methods = {Method::RFP};
    cfg.bin_sizes = {2.0};
    cfg.bins_explicit = true;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // bins with a non-LL method

    cfg.bins_explicit = false;
    cfg.methods = {Method::TL};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // TL without scenario

    cfg.methods = {Method::LL};
    cfg.split.train_fraction = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // bad split
    cfg.replay = true;
    CHECK_NOTHROW(cfg.validate());  // replay ignores the split spec

    cfg.threads = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("replay benchmark matches a directly computed oracle") {
    const auto dataset = llgeo_tests::two_grid_samples();

    BenchConfig cfg;
    cfg.methods = {Method::LL, Method::RFP};
    cfg.grid_sizes = {20.0};
    cfg.replay = true;
    const BenchResult result = run_benchmark(dataset, cfg);
    REQUIRE(result.cells.size() == 2);

    // Oracle: replicate the replay pipeline by hand for both methods.
    const GridSpec grid = dataset_grid(dataset, 20.0);
    const LookupTables tables = construct_grid_tables(dataset, BinSpec{1.0}, grid);
    const RfpIndex index = build_rfp_index(dataset, grid);
    std::vector<double> ll_errors, rfp_errors;
    for (const auto& s : dataset) {
        ll_errors.push_back((lookup_laterate(s.measurement, tables).position - s.position).norm());
        rfp_errors.push_back((rfp_localize(s.measurement, index).position - s.position).norm());
    }

    const CellReport& ll = result.cells[0];
    CHECK(ll.method == Method::LL);
    CHECK(ll.queries == dataset.size());
    CHECK(ll.repetitions == 1);
    CHECK(ll.err67_mean == error_percentile(ll_errors, 0.67));
    CHECK(ll.err95_mean == error_percentile(ll_errors, 0.95));
    CHECK(ll.coverage_mean == 1.0);  // replay trains on everything
    CHECK(ll.mean_ops_per_query == 1.0);  // one reading per query
    CHECK(ll.relative_err95 == ll.err95_mean / 20.0);

    const CellReport& rfp = result.cells[1];
    CHECK(rfp.method == Method::RFP);
    CHECK(rfp.err67_mean == error_percentile(rfp_errors, 0.67));
    CHECK(rfp.err95_mean == error_percentile(rfp_errors, 0.95));
    CHECK(rfp.mean_ops_per_query == 2.0);  // two grids scanned per query

    // Pooled CDF is monotone from min to max.
    REQUIRE(ll.cdf.size() == 101);
    CHECK(ll.cdf.front() == *std::min_element(ll_errors.begin(), ll_errors.end()));
    CHECK(ll.cdf.back() == *std::max_element(ll_errors.begin(), ll_errors.end()));
    CHECK(std::is_sorted(ll.cdf.begin(), ll.cdf.end()));
}

TEST_CASE("max_queries caps each repetition") {
    BenchConfig cfg;
    cfg.methods = {Method::LL};
    cfg.grid_sizes = {20.0};
    cfg.replay = true;
    cfg.max_queries = 3;
    const BenchResult result = run_benchmark(llgeo_tests::two_grid_samples(), cfg);
    CHECK(result.cells[0].queries == 3);
}

TEST_CASE("reports are byte-identical across thread counts") {
    Scenario sc;
    sc.antennas = {Antenna{1, Point(0.0, 0.0)}, Antenna{2, Point(90.0, 0.0)},
                   Antenna{3, Point(0.0, 90.0)}, Antenna{4, Point(90.0, 90.0)}};
    sc.noise_std = 1.0;
    sc.top_k = 4;
    sc.rng_seed = 11;
    sc.extent = Rect{0.0, 0.0, 90.0, 90.0};
    sc.normalize();
    Sampling sampling;
    sampling.kind = Sampling::Kind::UniformRandom;
    sampling.count = 200;
    const auto dataset = generate_dataset(sc, sampling, sc.rng_seed);

    BenchConfig cfg;
    cfg.methods = {Method::LL, Method::RFP, Method::TL};
    cfg.grid_sizes = {10.0, 25.0};
    cfg.split.train_fraction = 0.3;
    cfg.split.repetitions = 3;
    cfg.split.seed = 5;
    cfg.scenario = sc;

    auto render = [&](int threads) {
        BenchConfig c = cfg;
        c.threads = threads;
        const BenchResult r = run_benchmark(dataset, c);
        std::ostringstream csv, js;
        write_csv_report(csv, r);
        write_json_report(js, r, c);
        return std::pair<std::string, std::string>(csv.str(), js.str());
    };

    const auto serial = render(1);
    const auto parallel = render(4);
    CHECK(serial.first == parallel.first);
    CHECK(serial.second == parallel.second);
    // And across repeated runs at the same thread count.
    CHECK(render(4) == parallel);

    // The JSON config echo carries experiment identity, never thread count.
    const auto j = nlohmann::json::parse(serial.second);
    CHECK(!j.at("config").contains("threads"));
    CHECK(j.at("config").at("percentile_definition") == "nearest-rank");
    CHECK(j.at("config").at("train_fraction") == 0.3);
    CHECK(j.at("cells").size() == 6);
}

TEST_CASE("the report schema is pinned") {
    BenchConfig cfg;
    cfg.methods = {Method::RFP};
    cfg.grid_sizes = {20.0};
    cfg.replay = true;
    const BenchResult result = run_benchmark(llgeo_tests::two_grid_samples(), cfg);

    std::ostringstream csv;
    write_csv_report(csv, result);
    const std::string text = csv.str();
    const std::string header = text.substr(0, text.find('\n'));
    CHECK(header ==
          "method,grid_size_m,bin_size,repetitions,queries,err67_m,err67_std,err95_m,"
          "err95_std,mean_error_m,mean_error_std,relative_err67,relative_err95,coverage,"
          "coverage_std,mean_ops_per_query,no_information,insufficient");
    // Non-LL rows leave the bin column empty.
    CHECK(text.find("rfp,20,,1,") != std::string::npos);

    std::ostringstream timing;
    write_timing_csv(timing, result);
    CHECK(timing.str().rfind("method,grid_size_m,bin_size,build_seconds_mean,"
                             "query_seconds_per_query\n", 0) == 0);
}
