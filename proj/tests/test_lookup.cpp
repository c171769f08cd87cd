#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

#include "llgeo/lookup.hpp"
#include "fixtures.hpp"

using namespace llgeo;

namespace {

LocatedSample sample_at(int id, const Point& p,
                        std::initializer_list<std::pair<int, double>> readings) {
    LocatedSample s;
    s.id = id;
    s.position = p;
    for (const auto& [aid, rss] : readings) s.measurement.readings[aid] = rss;
    return s;
}

Measurement query(std::initializer_list<std::pair<int, double>> readings) {
    Measurement m;
    for (const auto& [aid, rss] : readings) m.readings[aid] = rss;
    return m;
}

// Independent replay of the leader rule keeping explicit member lists and
// recomputing each running mean from scratch, in the same join order.
std::vector<Point> cluster_oracle(const std::vector<Point>& points, double diameter) {
    std::vector<std::vector<Point>> members;
    auto mean = [](const std::vector<Point>& pts) {
        Point sum(0.0, 0.0);
        for (const auto& p : pts) sum += p;
        return Point(sum / static_cast<double>(pts.size()));
    };
    for (const auto& p : points) {
        bool placed = false;
        for (auto& group : members)
            if ((mean(group) - p).norm() <= diameter / 2.0) {
                group.push_back(p);
                placed = true;
                break;
            }
        if (!placed) members.push_back({p});
    }
    std::vector<Point> centers;
    for (const auto& group : members) centers.push_back(mean(group));
    return centers;
}

}  // namespace

TEST_CASE("table construction matches hand-built entries") {
    const GridSpec grid{Point(0.0, 0.0), 10.0};
    const BinSpec bin{1.0};

    CHECK(construct_grid_tables({}, bin, grid).cell_count() == 0);

    const auto single = construct_grid_tables(
        {sample_at(1, Point(3.0, 4.0), {{7, -50.2}})}, bin, grid);
    REQUIRE(single.cell_count() == 1);
    const auto& entries = single.grid_cells.at(LookupTables::Key{7, -51});
    REQUIRE(entries.size() == 1);
    CHECK(entries[0] == GridId{0, 0});

    // Two samples in one grid square with equal binned readings deduplicate.
    const auto deduped = construct_grid_tables(
        {sample_at(1, Point(3.0, 4.0), {{7, -50.2}}),
         sample_at(2, Point(9.0, 9.0), {{7, -50.9}})},
        bin, grid);
    CHECK(deduped.grid_cells.at(LookupTables::Key{7, -51}).size() == 1);
}

TEST_CASE("two-grid worked example builds disjoint per-bin tables") {
    const auto t = construct_grid_tables(llgeo_tests::two_grid_samples(), BinSpec{1.0},
                                         llgeo_tests::two_grid_spec());
    // Five distinct integer RSS values per square, no overlap: ten cells.
    CHECK(t.cell_count() == 10);
    const auto& near = t.grid_cells.at(LookupTables::Key{1, -61});
    REQUIRE(near.size() == 1);
    CHECK(near[0] == GridId{0, 0});
    const auto& far = t.grid_cells.at(LookupTables::Key{1, -62});
    REQUIRE(far.size() == 1);
    CHECK(far[0] == GridId{1, 0});
}

TEST_CASE("grid tables are construction-order invariant") {
    auto samples = llgeo_tests::two_grid_samples();
    const auto original = construct_grid_tables(samples, BinSpec{1.0},
                                                llgeo_tests::two_grid_spec());
    std::reverse(samples.begin(), samples.end());
    const auto reversed = construct_grid_tables(samples, BinSpec{1.0},
                                                llgeo_tests::two_grid_spec());
    CHECK(reversed == original);

    std::ostringstream a, b;
    write_lookup_tables(a, original);
    write_lookup_tables(b, reversed);
    CHECK(a.str() == b.str());
}

TEST_CASE("leader clustering follows the first-fit running-mean rule") {
    const std::vector<Point> pair{Point(0.0, 0.0), Point(0.5, 0.0)};
    auto centers = cluster_locations(pair, 2.0);
    REQUIRE(centers.size() == 1);
    CHECK(centers[0] == Point(0.25, 0.0));

    const std::vector<Point> split{Point(0.0, 0.0), Point(10.0, 0.0)};
    centers = cluster_locations(split, 2.0);
    REQUIRE(centers.size() == 2);
    CHECK(centers[0] == Point(0.0, 0.0));
    CHECK(centers[1] == Point(10.0, 0.0));

    // Boundary join: (1,0) is exactly D/2 from the first running mean.
    const std::vector<Point> mixed{Point(0.0, 0.0), Point(1.0, 0.0), Point(10.0, 0.0)};
    centers = cluster_locations(mixed, 2.0);
    REQUIRE(centers.size() == 2);
    CHECK(centers[0] == Point(0.5, 0.0));
    CHECK(centers[1] == Point(10.0, 0.0));

    CHECK_THROWS_AS(cluster_locations(pair, 0.0), ConfigError);
    CHECK_THROWS_AS(cluster_locations(pair, -1.0), ConfigError);
}

TEST_CASE("leader clustering matches an independent replay") {
    std::mt19937_64 gen(0xC105E);
    std::uniform_real_distribution<double> coord(0.0, 20.0);
    std::uniform_real_distribution<double> diam(0.5, 8.0);
    std::uniform_int_distribution<int> count(1, 40);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Point> pts;
        const int n = count(gen);
        pts.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pts.emplace_back(coord(gen), coord(gen));
        const double d = diam(gen);
        const auto got = cluster_locations(pts, d);
        const auto want = cluster_oracle(pts, d);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
    }
}

TEST_CASE("two-grid worked example resolves the overlapping reading") {
    const auto t = construct_grid_tables(llgeo_tests::two_grid_samples(), BinSpec{1.0},
                                         llgeo_tests::two_grid_spec());
    const auto est = lookup_laterate(query({{1, -61.0}}), t);
    CHECK(est.position == Point(10.0, 10.0));
    CHECK(est.status == EstimateStatus::Resolved);
    CHECK(est.candidates_remaining == 1);
    CHECK(est.ops == 1);
}

TEST_CASE("greedy intersection narrows across tables strongest-first") {
    const GridSpec grid{Point(0.0, 0.0), 10.0};
    const std::vector<LocatedSample> samples{
        sample_at(1, Point(5.0, 5.0), {{1, -50.0}, {2, -60.0}, {3, -70.0}}),
        sample_at(2, Point(15.0, 5.0), {{1, -50.0}}),
        sample_at(3, Point(25.0, 5.0), {{2, -60.0}}),
    };
    const auto t = construct_grid_tables(samples, BinSpec{1.0}, grid);

    LaterationOptions opts;
    opts.spread_threshold = 1.0;  // force narrowing past the first table
    opts.collect_candidates = true;
    const auto est = lookup_laterate(query({{1, -50.0}, {2, -60.0}, {3, -70.0}}), t, opts);
    // {A,B} from antenna 1, intersect {A,C} from antenna 2 leaves {A}; the
    // spread closes before antenna 3 is consulted, but its probe was counted.
    CHECK(est.position == Point(5.0, 5.0));
    CHECK(est.status == EstimateStatus::Resolved);
    CHECK(est.candidates_remaining == 1);
    CHECK(est.ops == 3);
    REQUIRE(est.candidates.size() == 1);
    CHECK(est.candidates[0] == Point(5.0, 5.0));
}

TEST_CASE("an intersection that empties reverts to the previous set") {
    const GridSpec grid{Point(0.0, 0.0), 10.0};
    const std::vector<LocatedSample> samples{
        sample_at(1, Point(5.0, 5.0), {{1, -50.0}}),
        sample_at(2, Point(15.0, 5.0), {{1, -50.0}}),
        sample_at(3, Point(25.0, 5.0), {{2, -60.0}}),
    };
    const auto t = construct_grid_tables(samples, BinSpec{1.0}, grid);

    LaterationOptions opts;
    opts.spread_threshold = 1.0;
    opts.collect_candidates = true;
    const auto est = lookup_laterate(query({{1, -50.0}, {2, -60.0}}), t, opts);
    CHECK(est.position == Point(10.0, 5.0));
    CHECK(est.status == EstimateStatus::Ambiguous);
    CHECK(est.candidates_remaining == 2);
    CHECK(est.ops == 2);
    REQUIRE(est.candidates.size() == 2);
}

TEST_CASE("ambiguous when readings run out before the spread closes") {
    const GridSpec grid{Point(0.0, 0.0), 10.0};
    const std::vector<LocatedSample> samples{
        sample_at(1, Point(5.0, 5.0), {{1, -50.0}}),
        sample_at(2, Point(15.0, 5.0), {{1, -50.0}}),
        sample_at(3, Point(95.0, 5.0), {{1, -50.0}}),
    };
    const auto t = construct_grid_tables(samples, BinSpec{1.0}, grid);
    const auto est = lookup_laterate(query({{1, -50.0}}), t);
    CHECK(est.status == EstimateStatus::Ambiguous);
    CHECK(est.candidates_remaining == 3);
    CHECK(est.position.x() == doctest::Approx((5.0 + 15.0 + 95.0) / 3.0));
    CHECK(est.position.y() == doctest::Approx(5.0));
}

TEST_CASE("readings without table entries are skipped, not fatal") {
    const auto t = construct_grid_tables(llgeo_tests::two_grid_samples(), BinSpec{1.0},
                                         llgeo_tests::two_grid_spec());
    // Antenna 9 is unknown and sorts first (strongest); its probe misses.
    const auto est = lookup_laterate(query({{1, -61.0}, {9, -40.0}}), t);
    CHECK(est.position == Point(10.0, 10.0));
    CHECK(est.status == EstimateStatus::Resolved);
    CHECK(est.ops == 2);
}

TEST_CASE("all-miss queries fall back to the strongest antenna position") {
    auto t = construct_grid_tables(llgeo_tests::two_grid_samples(), BinSpec{1.0},
                                   llgeo_tests::two_grid_spec());
    const Measurement miss = query({{1, -80.0}, {9, -40.0}});
    CHECK_THROWS_AS(lookup_laterate(miss, t), NoInformationError);

    attach_antennas(t, {Antenna{1, Point(0.0, 0.0)}, Antenna{9, Point(100.0, 200.0)}});
    const auto est = lookup_laterate(miss, t);
    CHECK(est.status == EstimateStatus::FallbackDefault);
    CHECK(est.position == Point(100.0, 200.0));
    CHECK(est.candidates_remaining == 0);
    CHECK(est.ops == 2);

    CHECK_THROWS_AS(lookup_laterate(Measurement{}, t), NoInformationError);
}

TEST_CASE("continuous mode filters candidates by tolerance") {
    const std::vector<LocatedSample> samples{
        sample_at(1, Point(0.0, 0.0), {{1, -50.0}}),
        sample_at(2, Point(100.0, 0.0), {{1, -50.0}}),
        sample_at(3, Point(0.5, 0.0), {{2, -60.0}}),
    };
    const auto t = construct_continuous_tables(samples, BinSpec{1.0}, 2.0);
    REQUIRE(t.point_cells.at(LookupTables::Key{1, -50}).size() == 2);

    // Default tolerance 2*D keeps the near candidate only.
    const auto est = lookup_laterate(query({{1, -50.0}, {2, -60.0}}), t);
    CHECK(est.position == Point(0.0, 0.0));
    CHECK(est.status == EstimateStatus::Resolved);
    CHECK(est.candidates_remaining == 1);

    // A tolerance too tight to match anything empties the set; the previous
    // candidates survive and the estimate stays ambiguous.
    LaterationOptions tight;
    tight.tolerance = 0.1;
    const auto reverted = lookup_laterate(query({{1, -50.0}, {2, -60.0}}), t, tight);
    CHECK(reverted.status == EstimateStatus::Ambiguous);
    CHECK(reverted.candidates_remaining == 2);
    CHECK(reverted.position == Point(50.0, 0.0));

    LaterationOptions bad;
    bad.tolerance = -1.0;
    CHECK_THROWS_AS(lookup_laterate(query({{1, -50.0}}), t, bad), ConfigError);
    LaterationOptions bad2;
    bad2.spread_threshold = -1.0;
    CHECK_THROWS_AS(lookup_laterate(query({{1, -50.0}}), t, bad2), ConfigError);
}

TEST_CASE("a sample's own grid survives lateration of its own readings") {
    Scenario sc;
    sc.antennas = {Antenna{1, Point(0.0, 0.0)}, Antenna{2, Point(100.0, 0.0)},
                   Antenna{3, Point(0.0, 100.0)}, Antenna{4, Point(100.0, 100.0)}};
    sc.noise_std = 0.0;
    sc.top_k = 4;
    sc.rng_seed = 7;
    sc.extent = Rect{0.0, 0.0, 100.0, 100.0};
    sc.normalize();

    Sampling sampling;
    sampling.kind = Sampling::Kind::GridPoints;
    sampling.nx = 10;
    sampling.ny = 10;
    const auto samples = generate_dataset(sc, sampling, sc.rng_seed);
    REQUIRE(samples.size() == 100);

    const GridSpec grid{Point(0.0, 0.0), 10.0};
    const auto t = construct_grid_tables(samples, BinSpec{2.0}, grid);

    LaterationOptions opts;
    opts.spread_threshold = 0.0;  // narrow as far as the readings allow
    opts.collect_candidates = true;
    for (const auto& s : samples) {
        const auto est = lookup_laterate(s.measurement, t, opts);
        CHECK(est.ops == s.measurement.readings.size());
        const Point own = center_of(grid_of(s.position, grid), grid);
        const bool present =
            std::any_of(est.candidates.begin(), est.candidates.end(),
                        [&](const Point& c) { return c == own; });
        CHECK(present);
    }
}
