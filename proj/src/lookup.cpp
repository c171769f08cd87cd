#include "llgeo/lookup.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace llgeo {

const char* to_string(EstimateStatus s) {
    switch (s) {
        case EstimateStatus::Resolved: return "resolved";
        case EstimateStatus::Ambiguous: return "ambiguous";
        case EstimateStatus::FallbackDefault: return "fallback";
    }
    return "unknown";
}

bool LookupTables::operator==(const LookupTables& other) const {
    auto pts_eq = [](const std::map<Key, std::vector<Point>>& a,
                     const std::map<Key, std::vector<Point>>& b) {
        if (a.size() != b.size()) return false;
        auto ia = a.begin();
        for (auto ib = b.begin(); ib != b.end(); ++ia, ++ib) {
            if (ia->first != ib->first || ia->second.size() != ib->second.size())
                return false;
            for (std::size_t i = 0; i < ia->second.size(); ++i)
                if (ia->second[i] != ib->second[i]) return false;
        }
        return true;
    };
    auto ant_eq = [](const std::map<int, Point>& a, const std::map<int, Point>& b) {
        if (a.size() != b.size()) return false;
        auto ia = a.begin();
        for (auto ib = b.begin(); ib != b.end(); ++ia, ++ib)
            if (ia->first != ib->first || ia->second != ib->second) return false;
        return true;
    };
    return mode == other.mode && bin.bin_size == other.bin.bin_size &&
           (mode != Mode::Grid ||
            (grid.origin == other.grid.origin && grid.cell_size == other.grid.cell_size)) &&
           (mode != Mode::Continuous || cluster_diameter == other.cluster_diameter) &&
           grid_cells == other.grid_cells && pts_eq(point_cells, other.point_cells) &&
           ant_eq(antenna_positions, other.antenna_positions);
}

std::vector<Point> cluster_locations(const std::vector<Point>& points, double diameter) {
    if (!(diameter > 0.0) || !std::isfinite(diameter))
        throw ConfigError("cluster diameter must be positive and finite");
    struct Cluster {
        Point sum{0.0, 0.0};
        std::size_t n = 0;
        Point center() const { return sum / static_cast<double>(n); }
    };
    std::vector<Cluster> clusters;
    const double r = diameter / 2.0;
    for (const auto& p : points) {
        Cluster* home = nullptr;
        for (auto& c : clusters)
            if ((c.center() - p).norm() <= r) {
                home = &c;
                break;
            }
        if (!home) {
            clusters.push_back(Cluster{});
            home = &clusters.back();
        }
        home->sum += p;
        home->n += 1;
    }
    std::vector<Point> centers;
    centers.reserve(clusters.size());
    for (const auto& c : clusters) centers.push_back(c.center());
    return centers;
}

namespace {

bool point_less(const Point& a, const Point& b) {
    if (a.x() != b.x()) return a.x() < b.x();
    return a.y() < b.y();
}

}  // namespace

LookupTables construct_grid_tables(const std::vector<LocatedSample>& samples,
                                   const BinSpec& bin, const GridSpec& grid) {
    bin.validate();
    grid.validate();
    LookupTables t;
    t.mode = LookupTables::Mode::Grid;
    t.bin = bin;
    t.grid = grid;
    for (const auto& s : samples) {
        const GridId g = grid_of(s.position, grid);
        for (const auto& [aid, rss] : s.measurement.readings)
            t.grid_cells[LookupTables::Key{aid, bin_rss(rss, bin)}].push_back(g);
    }
    for (auto& [key, entries] : t.grid_cells) {
        std::sort(entries.begin(), entries.end());
        entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    }
    return t;
}

LookupTables construct_continuous_tables(const std::vector<LocatedSample>& samples,
                                         const BinSpec& bin, double cluster_diameter) {
    bin.validate();
    if (!(cluster_diameter > 0.0) || !std::isfinite(cluster_diameter))
        throw ConfigError("cluster diameter must be positive and finite");
    LookupTables t;
    t.mode = LookupTables::Mode::Continuous;
    t.bin = bin;
    t.cluster_diameter = cluster_diameter;
    // Gather member locations per cell in sample order (clustering is
    // order-sensitive by design), then cluster each cell independently.
    std::map<LookupTables::Key, std::vector<Point>> members;
    for (const auto& s : samples)
        for (const auto& [aid, rss] : s.measurement.readings)
            members[LookupTables::Key{aid, bin_rss(rss, bin)}].push_back(s.position);
    for (auto& [key, pts] : members) {
        auto centers = cluster_locations(pts, cluster_diameter);
        std::sort(centers.begin(), centers.end(), point_less);
        centers.erase(std::unique(centers.begin(), centers.end(),
                                  [](const Point& a, const Point& b) { return a == b; }),
                      centers.end());
        t.point_cells[key] = std::move(centers);
    }
    return t;
}

void attach_antennas(LookupTables& t, const std::vector<Antenna>& antennas) {
    for (const auto& a : antennas) t.antenna_positions[a.id] = a.position;
}

namespace {

// Max pairwise distance with bounding-box shortcuts: the box diagonal is an
// upper bound and the longest box side a lower bound, so the quadratic scan
// only runs when the threshold lies strictly between them.
bool spread_within(const std::vector<Point>& pts, double threshold) {
    if (pts.size() < 2) return true;
    double xmin = pts[0].x(), xmax = xmin, ymin = pts[0].y(), ymax = ymin;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
    }
    const double w = xmax - xmin, h = ymax - ymin;
    if (std::sqrt(w * w + h * h) <= threshold) return true;
    if (std::max(w, h) > threshold) return false;
    double max2 = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            max2 = std::max(max2, (pts[i] - pts[j]).squaredNorm());
    return std::sqrt(max2) <= threshold;
}

Point mean_of(const std::vector<Point>& pts) {
    Point sum(0.0, 0.0);
    for (const auto& p : pts) sum += p;
    return sum / static_cast<double>(pts.size());
}

}  // namespace

LocationEstimate lookup_laterate(const Measurement& m, const LookupTables& t,
                                 const LaterationOptions& opts) {
    if (m.empty()) throw NoInformationError("query has no readings");
    const bool grid_mode = t.mode == LookupTables::Mode::Grid;
    const double tolerance = opts.tolerance.value_or(2.0 * t.cluster_diameter);
    const double spread_threshold = opts.spread_threshold.value_or(
        grid_mode ? t.grid.cell_size * std::numbers::sqrt2 : t.cluster_diameter);
    if (!grid_mode && (!(tolerance >= 0.0) || !std::isfinite(tolerance)))
        throw ConfigError("tolerance must be >= 0 and finite");
    if (!(spread_threshold >= 0.0) || !std::isfinite(spread_threshold))
        throw ConfigError("spread threshold must be >= 0 and finite");

    // Readings strongest-first, ties by ascending antenna id.
    std::vector<std::pair<double, int>> order;
    order.reserve(m.readings.size());
    for (const auto& [aid, rss] : m.readings) order.emplace_back(rss, aid);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    LocationEstimate est;

    // Probe each reading's cell once; readings with empty cells drop out.
    struct Probe {
        const std::vector<GridId>* grids = nullptr;
        const std::vector<Point>* points = nullptr;
    };
    std::vector<Probe> probes;
    probes.reserve(order.size());
    for (const auto& [rss, aid] : order) {
        const LookupTables::Key key{aid, bin_rss(rss, t.bin)};
        ++est.ops;
        Probe pr;
        if (grid_mode) {
            auto it = t.grid_cells.find(key);
            if (it == t.grid_cells.end() || it->second.empty()) continue;
            pr.grids = &it->second;
        } else {
            auto it = t.point_cells.find(key);
            if (it == t.point_cells.end() || it->second.empty()) continue;
            pr.points = &it->second;
        }
        probes.push_back(pr);
    }

    if (probes.empty()) {
        const int strongest = order.front().second;
        auto it = t.antenna_positions.find(strongest);
        if (it == t.antenna_positions.end())
            throw NoInformationError(
                "no table entry matches any reading and antenna " +
                std::to_string(strongest) + " has no known position");
        est.position = it->second;
        est.status = EstimateStatus::FallbackDefault;
        est.candidates_remaining = 0;
        return est;
    }

    // Grid mode filters on grid ids (exact equality); continuous mode on
    // center points within the tolerance. Positions are materialized only
    // for the spread check and the final mean.
    std::vector<GridId> cur_g;
    std::vector<Point> cur_p;
    if (grid_mode)
        cur_g = *probes[0].grids;
    else
        cur_p = *probes[0].points;

    auto positions = [&]() {
        if (!grid_mode) return cur_p;
        std::vector<Point> out;
        out.reserve(cur_g.size());
        for (const auto& g : cur_g) out.push_back(center_of(g, t.grid));
        return out;
    };

    std::size_t k = 1;
    while (!spread_within(positions(), spread_threshold) && k < probes.size()) {
        const Probe& pr = probes[k];
        ++k;
        if (grid_mode) {
            std::vector<GridId> next;
            next.reserve(cur_g.size());
            for (const auto& g : cur_g)
                if (std::binary_search(pr.grids->begin(), pr.grids->end(), g))
                    next.push_back(g);
            if (next.empty()) break;  // revert to previous set and stop
            cur_g = std::move(next);
        } else {
            std::vector<Point> next;
            next.reserve(cur_p.size());
            for (const auto& c : cur_p) {
                bool keep = false;
                for (const auto& q : *pr.points)
                    if ((c - q).norm() <= tolerance) {
                        keep = true;
                        break;
                    }
                if (keep) next.push_back(c);
            }
            if (next.empty()) break;
            cur_p = std::move(next);
        }
    }

    const std::vector<Point> final_positions = positions();
    est.position = mean_of(final_positions);
    est.candidates_remaining = final_positions.size();
    est.status = spread_within(final_positions, spread_threshold)
                     ? EstimateStatus::Resolved
                     : EstimateStatus::Ambiguous;
    if (opts.collect_candidates) est.candidates = final_positions;
    return est;
}

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

struct LineReader {
    std::istream& in;
    std::size_t lineno = 0;
    bool next(std::vector<std::string>& toks) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++lineno;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            const auto first = raw.find_first_not_of(" \t");
            if (first == std::string::npos || raw[first] == '#') continue;
            toks = tokens_of(raw);
            return true;
        }
        return false;
    }
    std::vector<std::string> require(const char* what) {
        std::vector<std::string> toks;
        if (!next(toks)) throw ParseError(std::string("unexpected end of file, expected ") + what,
                                          lineno);
        return toks;
    }
};

}  // namespace

void write_lookup_tables(std::ostream& out, const LookupTables& t) {
    const bool grid_mode = t.mode == LookupTables::Mode::Grid;
    out << "llt 1\n";
    out << "mode " << (grid_mode ? "grid" : "continuous") << '\n';
    out << "bin " << format_double(t.bin.bin_size) << '\n';
    if (grid_mode)
        out << "grid " << format_double(t.grid.origin.x()) << ' '
            << format_double(t.grid.origin.y()) << ' ' << format_double(t.grid.cell_size)
            << '\n';
    else
        out << "diameter " << format_double(t.cluster_diameter) << '\n';
    out << "antennas " << t.antenna_positions.size() << '\n';
    for (const auto& [id, pos] : t.antenna_positions)
        out << "antenna " << id << ' ' << format_double(pos.x()) << ' '
            << format_double(pos.y()) << '\n';
    out << "cells " << t.cell_count() << '\n';
    if (grid_mode) {
        for (const auto& [key, entries] : t.grid_cells) {
            out << "cell " << key.antenna << ' ' << key.bin << ' ' << entries.size();
            for (const auto& g : entries) out << ' ' << g.ix << ',' << g.iy;
            out << '\n';
        }
    } else {
        for (const auto& [key, entries] : t.point_cells) {
            out << "cell " << key.antenna << ' ' << key.bin << ' ' << entries.size();
            for (const auto& p : entries)
                out << ' ' << format_double(p.x()) << ',' << format_double(p.y());
            out << '\n';
        }
    }
}

LookupTables read_lookup_tables(std::istream& in) {
    LineReader rd{in};
    auto toks = rd.require("'llt 1' header");
    if (toks.size() != 2 || toks[0] != "llt" || toks[1] != "1")
        throw ParseError("not a lookup-table artifact (expected 'llt 1')", rd.lineno);

    LookupTables t;
    toks = rd.require("mode");
    if (toks.size() != 2 || toks[0] != "mode" || (toks[1] != "grid" && toks[1] != "continuous"))
        throw ParseError("expected 'mode grid|continuous'", rd.lineno);
    const bool grid_mode = toks[1] == "grid";
    t.mode = grid_mode ? LookupTables::Mode::Grid : LookupTables::Mode::Continuous;

    toks = rd.require("bin");
    if (toks.size() != 2 || toks[0] != "bin")
        throw ParseError("expected 'bin <size>'", rd.lineno);
    t.bin.bin_size = parse_double(toks[1], rd.lineno, "bin size");

    if (grid_mode) {
        toks = rd.require("grid");
        if (toks.size() != 4 || toks[0] != "grid")
            throw ParseError("expected 'grid <ox> <oy> <cell>'", rd.lineno);
        t.grid.origin.x() = parse_double(toks[1], rd.lineno, "grid origin x");
        t.grid.origin.y() = parse_double(toks[2], rd.lineno, "grid origin y");
        t.grid.cell_size = parse_double(toks[3], rd.lineno, "grid cell size");
    } else {
        toks = rd.require("diameter");
        if (toks.size() != 2 || toks[0] != "diameter")
            throw ParseError("expected 'diameter <D>'", rd.lineno);
        t.cluster_diameter = parse_double(toks[1], rd.lineno, "cluster diameter");
    }

    toks = rd.require("antennas");
    if (toks.size() != 2 || toks[0] != "antennas")
        throw ParseError("expected 'antennas <n>'", rd.lineno);
    const long long n_ant = parse_int(toks[1], rd.lineno, "antenna count");
    for (long long i = 0; i < n_ant; ++i) {
        toks = rd.require("antenna");
        if (toks.size() != 4 || toks[0] != "antenna")
            throw ParseError("expected 'antenna <id> <x> <y>'", rd.lineno);
        const int id = static_cast<int>(parse_int(toks[1], rd.lineno, "antenna id"));
        t.antenna_positions[id] = Point(parse_double(toks[2], rd.lineno, "antenna x"),
                                        parse_double(toks[3], rd.lineno, "antenna y"));
    }

    toks = rd.require("cells");
    if (toks.size() != 2 || toks[0] != "cells")
        throw ParseError("expected 'cells <n>'", rd.lineno);
    const long long n_cells = parse_int(toks[1], rd.lineno, "cell count");
    for (long long i = 0; i < n_cells; ++i) {
        toks = rd.require("cell");
        if (toks.size() < 4 || toks[0] != "cell")
            throw ParseError("expected 'cell <antenna> <bin> <count> entries...'", rd.lineno);
        LookupTables::Key key{static_cast<int>(parse_int(toks[1], rd.lineno, "antenna id")),
                              parse_int(toks[2], rd.lineno, "bin index")};
        const long long cnt = parse_int(toks[3], rd.lineno, "entry count");
        if (static_cast<long long>(toks.size()) != 4 + cnt)
            throw ParseError("cell entry count mismatch", rd.lineno);
        if (grid_mode) {
            auto& entries = t.grid_cells[key];
            for (long long e = 0; e < cnt; ++e) {
                const std::string& tok = toks[4 + e];
                const auto comma = tok.find(',');
                if (comma == std::string::npos)
                    throw ParseError("expected 'ix,iy' entry", rd.lineno);
                entries.push_back(
                    GridId{parse_int(tok.substr(0, comma), rd.lineno, "grid ix"),
                           parse_int(tok.substr(comma + 1), rd.lineno, "grid iy")});
            }
        } else {
            auto& entries = t.point_cells[key];
            for (long long e = 0; e < cnt; ++e) {
                const std::string& tok = toks[4 + e];
                const auto comma = tok.find(',');
                if (comma == std::string::npos)
                    throw ParseError("expected 'x,y' entry", rd.lineno);
                entries.emplace_back(parse_double(tok.substr(0, comma), rd.lineno, "entry x"),
                                     parse_double(tok.substr(comma + 1), rd.lineno, "entry y"));
            }
        }
    }
    return t;
}

void save_lookup_tables(const std::string& path, const LookupTables& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    write_lookup_tables(out, t);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

LookupTables load_lookup_tables(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lookup-table file: " + path);
    return read_lookup_tables(in);
}

}  // namespace llgeo
