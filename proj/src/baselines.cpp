#include "llgeo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

namespace llgeo {

MeasurementDistanceKind distance_kind_of(const std::string& name) {
    if (name == "euclidean") return MeasurementDistanceKind::EuclideanSharedSupport;
    if (name == "cosine") return MeasurementDistanceKind::CosineSharedSupport;
    throw ConfigError("unknown distance kind: " + name + " (expected euclidean|cosine)");
}

const char* to_string(MeasurementDistanceKind k) {
    return k == MeasurementDistanceKind::EuclideanSharedSupport ? "euclidean" : "cosine";
}

RfpIndex build_rfp_index(const std::vector<LocatedSample>& samples, const GridSpec& spec) {
    spec.validate();
    std::map<GridId, std::map<int, std::vector<double>>> acc;
    for (const auto& s : samples) {
        auto& grid_acc = acc[grid_of(s.position, spec)];
        for (const auto& [aid, rss] : s.measurement.readings)
            grid_acc[aid].push_back(rss);
    }
    RfpIndex index;
    index.grid = spec;
    for (auto& [gid, grid_acc] : acc) {
        auto& out = index.grids[gid];
        for (auto& [aid, values] : grid_acc) {
            std::sort(values.begin(), values.end());
            double sum = 0.0;
            for (double v : values) sum += v;
            out[aid] = RfpIndex::Stats{sum / static_cast<double>(values.size()),
                                       values.size()};
        }
    }
    return index;
}

namespace {

constexpr double kSentinel = std::numeric_limits<double>::infinity();

// Shared-support distance between a query and a grid's mean vector; both
// maps are ordered by antenna id, so shared keys come from a merge walk.
double distance_to_means(const Measurement& m, const std::map<int, RfpIndex::Stats>& means,
                         MeasurementDistanceKind kind) {
    double sq = 0.0, dot = 0.0, n1 = 0.0, n2 = 0.0;
    bool shared = false;
    auto it1 = m.readings.begin();
    auto it2 = means.begin();
    while (it1 != m.readings.end() && it2 != means.end()) {
        if (it1->first < it2->first) {
            ++it1;
        } else if (it2->first < it1->first) {
            ++it2;
        } else {
            shared = true;
            const double r1 = it1->second, r2 = it2->second.mean;
            const double d = r1 - r2;
            sq += d * d;
            dot += r1 * r2;
            n1 += r1 * r1;
            n2 += r2 * r2;
            ++it1;
            ++it2;
        }
    }
    if (!shared) return kSentinel;
    if (kind == MeasurementDistanceKind::EuclideanSharedSupport) return std::sqrt(sq);
    if (n1 == 0.0 || n2 == 0.0) return kSentinel;
    return 1.0 - dot / (std::sqrt(n1) * std::sqrt(n2));
}

}  // namespace

double measurement_distance(const Measurement& a, const Measurement& b,
                            MeasurementDistanceKind kind) {
    std::map<int, RfpIndex::Stats> means;
    for (const auto& [aid, rss] : b.readings) means[aid] = RfpIndex::Stats{rss, 1};
    return distance_to_means(a, means, kind);
}

LocationEstimate rfp_localize(const Measurement& m, const RfpIndex& index,
                              MeasurementDistanceKind kind) {
    if (index.empty()) throw NoInformationError("RFP index is empty");
    if (m.empty()) throw NoInformationError("query has no readings");
    LocationEstimate est;
    double best = kSentinel;
    const GridId* best_gid = nullptr;
    for (const auto& [gid, means] : index.grids) {
        ++est.ops;
        const double d = distance_to_means(m, means, kind);
        if (d < best) {
            best = d;
            best_gid = &gid;
        }
    }
    if (!best_gid)
        throw NoInformationError("query shares no antenna with any grid in the index");
    est.position = center_of(*best_gid, index.grid);
    est.status = EstimateStatus::Resolved;
    est.candidates_remaining = 1;
    return est;
}

namespace {

struct Anchor {
    Point pos;
    double dist;  // d(r), meters
};

double tl_objective(const std::vector<Anchor>& anchors, const Point& p) {
    double obj = 0.0;
    for (const auto& a : anchors) {
        const double f = (a.pos - p).squaredNorm() - a.dist * a.dist;
        obj += f * f;
    }
    return obj;
}

bool point_less_xy(const Point& a, const Point& b) {
    if (a.x() != b.x()) return a.x() < b.x();
    return a.y() < b.y();
}

}  // namespace

LocationEstimate tl_localize(const Measurement& m, const std::vector<Antenna>& antennas,
                             const PathLossModel& model, const TlOptions& opts) {
    model.validate();
    if (opts.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(opts.step_tolerance > 0.0)) throw ConfigError("step_tolerance must be > 0");

    std::map<int, Point> positions;
    for (const auto& a : antennas) positions[a.id] = a.position;
    std::vector<Anchor> anchors;
    anchors.reserve(m.readings.size());
    for (const auto& [aid, rss] : m.readings) {
        auto it = positions.find(aid);
        if (it == positions.end()) continue;
        anchors.push_back(Anchor{it->second, distance_of(model, rss)});
    }
    if (anchors.size() < 3)
        throw InsufficientObservationsError(
            "lateration needs >= 3 readings with known antenna positions, got " +
            std::to_string(anchors.size()));

    // Inverse-distance weighted centroid start: strong (near) readings pull
    // the initial iterate toward themselves.
    Point p(0.0, 0.0);
    double wsum = 0.0;
    for (const auto& a : anchors) {
        const double w = 1.0 / std::max(a.dist, model.d0);
        p += w * a.pos;
        wsum += w;
    }
    p /= wsum;

    // Anchor geometry. Collinear layouts make the anchor line an invariant
    // set of the descent (gradient and model are mirror-symmetric across it),
    // so an on-line start would stall at the on-line saddle; nudge it off by
    // one mean ranging distance along the perpendicular.
    Point centroid(0.0, 0.0);
    for (const auto& a : anchors) centroid += a.pos;
    centroid /= static_cast<double>(anchors.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& a : anchors) {
        const Eigen::Vector2d d = a.pos - centroid;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(1);
    const bool collinear = hi <= 0.0 || lo <= 1e-12 * hi;
    if (collinear) {
        Eigen::Vector2d v =
            hi > 0.0 ? Eigen::Vector2d(eig.eigenvectors().col(0)) : Eigen::Vector2d(1.0, 0.0);
        if (v.x() < 0.0 || (v.x() == 0.0 && v.y() < 0.0)) v = -v;
        double scale = 0.0;
        for (const auto& a : anchors) scale += a.dist;
        scale /= static_cast<double>(anchors.size());
        p += scale * v;
    }

    double obj = tl_objective(anchors, p);
    double lambda = 1e-3;
    bool converged = false;
    LocationEstimate est;
    for (int iter = 0; iter < opts.max_iterations && !converged; ++iter) {
        ++est.ops;
        Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
        Eigen::Vector2d g = Eigen::Vector2d::Zero();
        for (const auto& a : anchors) {
            const Eigen::Vector2d jrow = -2.0 * (a.pos - p);
            const double f = (a.pos - p).squaredNorm() - a.dist * a.dist;
            h += jrow * jrow.transpose();
            g += jrow * f;
        }
        bool accepted = false;
        while (lambda <= 1e12) {
            const Eigen::Matrix2d damped = h + lambda * Eigen::Matrix2d::Identity();
            const Eigen::Vector2d step = damped.ldlt().solve(-g);
            const Point trial = p + step;
            const double trial_obj = tl_objective(anchors, trial);
            if (std::isfinite(trial_obj) && trial_obj < obj) {
                p = trial;
                obj = trial_obj;
                lambda = std::max(lambda * 0.1, 1e-12);
                accepted = true;
                if (step.norm() < opts.step_tolerance) converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // Damping exhausted: the iterate is at (numerically) a stationary
            // point; treat as converged.
            converged = true;
        }
    }

    est.position = p;
    est.status = converged ? EstimateStatus::Resolved : EstimateStatus::Ambiguous;
    est.candidates_remaining = 1;

    // Collinear anchors admit a mirror image across the anchor line with an
    // equal-by-symmetry objective; pick the better side deterministically.
    // A solution sitting on the line itself is its own mirror and stays
    // unambiguous.
    if (collinear && hi > 0.0) {
        const Eigen::Vector2d u = eig.eigenvectors().col(1);  // line direction
        const Eigen::Matrix2d reflect = 2.0 * u * u.transpose() - Eigen::Matrix2d::Identity();
        const Point mirror = centroid + reflect * (p - centroid);
        const double mobj = tl_objective(anchors, mirror);
        const double band = 1e-9 * std::max(1.0, std::max(obj, mobj));
        if ((mirror - p).norm() > opts.step_tolerance && std::abs(mobj - obj) <= band) {
            est.status = EstimateStatus::Ambiguous;
            if (mobj < obj || (mobj == obj && point_less_xy(mirror, p)))
                est.position = mirror;
        } else if (mobj < obj) {
            est.position = mirror;
        }
    }
    return est;
}

void write_rfp_index(std::ostream& out, const RfpIndex& index) {
    out << "rfi 1\n";
    out << "grid " << format_double(index.grid.origin.x()) << ' '
        << format_double(index.grid.origin.y()) << ' '
        << format_double(index.grid.cell_size) << '\n';
    out << "grids " << index.grids.size() << '\n';
    for (const auto& [gid, means] : index.grids) {
        out << "g " << gid.ix << ' ' << gid.iy << ' ' << means.size();
        for (const auto& [aid, st] : means)
            out << ' ' << aid << ':' << format_double(st.mean) << ':' << st.count;
        out << '\n';
    }
}

RfpIndex read_rfp_index(std::istream& in) {
    RfpIndex index;
    std::string raw;
    std::size_t lineno = 0;
    auto next_tokens = [&](const char* what) {
        while (std::getline(in, raw)) {
            ++lineno;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            const auto first = raw.find_first_not_of(" \t");
            if (first == std::string::npos || raw[first] == '#') continue;
            std::vector<std::string> toks;
            std::istringstream is(raw);
            std::string tok;
            while (is >> tok) toks.push_back(tok);
            return toks;
        }
        throw ParseError(std::string("unexpected end of file, expected ") + what, lineno);
    };

    auto toks = next_tokens("'rfi 1' header");
    if (toks.size() != 2 || toks[0] != "rfi" || toks[1] != "1")
        throw ParseError("not an RFP index artifact (expected 'rfi 1')", lineno);
    toks = next_tokens("grid");
    if (toks.size() != 4 || toks[0] != "grid")
        throw ParseError("expected 'grid <ox> <oy> <cell>'", lineno);
    index.grid.origin.x() = parse_double(toks[1], lineno, "grid origin x");
    index.grid.origin.y() = parse_double(toks[2], lineno, "grid origin y");
    index.grid.cell_size = parse_double(toks[3], lineno, "grid cell size");
    toks = next_tokens("grids");
    if (toks.size() != 2 || toks[0] != "grids")
        throw ParseError("expected 'grids <n>'", lineno);
    const long long n = parse_int(toks[1], lineno, "grid count");
    for (long long i = 0; i < n; ++i) {
        toks = next_tokens("g");
        if (toks.size() < 4 || toks[0] != "g")
            throw ParseError("expected 'g <ix> <iy> <count> aid:mean:count...'", lineno);
        const GridId gid{parse_int(toks[1], lineno, "grid ix"),
                         parse_int(toks[2], lineno, "grid iy")};
        const long long cnt = parse_int(toks[3], lineno, "reading count");
        if (static_cast<long long>(toks.size()) != 4 + cnt)
            throw ParseError("grid reading count mismatch", lineno);
        auto& means = index.grids[gid];
        for (long long e = 0; e < cnt; ++e) {
            const std::string& tok = toks[4 + e];
            const auto c1 = tok.find(':');
            const auto c2 = c1 == std::string::npos ? c1 : tok.find(':', c1 + 1);
            if (c2 == std::string::npos)
                throw ParseError("expected 'aid:mean:count' entry", lineno);
            const int aid = static_cast<int>(parse_int(tok.substr(0, c1), lineno, "antenna id"));
            RfpIndex::Stats st;
            st.mean = parse_double(tok.substr(c1 + 1, c2 - c1 - 1), lineno, "mean");
            st.count = static_cast<std::size_t>(parse_int(tok.substr(c2 + 1), lineno, "count"));
            means[aid] = st;
        }
    }
    return index;
}

void save_rfp_index(const std::string& path, const RfpIndex& index) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    write_rfp_index(out, index);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

RfpIndex load_rfp_index(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open RFP index file: " + path);
    return read_rfp_index(in);
}

}  // namespace llgeo
