#include "llgeo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace llgeo {

void Scenario::normalize() {
    model.validate();
    extent.validate();
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
        throw ConfigError("noise_std must be >= 0 and finite");
    for (const auto& o : obstacles) {
        o.rect.validate();
        if (!(o.penalty >= 0.0) || !std::isfinite(o.penalty))
            throw ConfigError("obstacle penalty must be >= 0 and finite");
    }
    std::sort(antennas.begin(), antennas.end(),
              [](const Antenna& a, const Antenna& b) { return a.id < b.id; });
    for (std::size_t i = 0; i + 1 < antennas.size(); ++i)
        if (antennas[i].id == antennas[i + 1].id)
            throw ConfigError("duplicate antenna id " + std::to_string(antennas[i].id));
    for (const auto& a : antennas)
        if (!a.position.allFinite())
            throw ConfigError("antenna position must be finite");
}

const Antenna* Scenario::find_antenna(int id) const {
    auto it = std::lower_bound(antennas.begin(), antennas.end(), id,
                               [](const Antenna& a, int v) { return a.id < v; });
    return (it != antennas.end() && it->id == id) ? &*it : nullptr;
}

double GaussianDraws::uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double GaussianDraws::next(double stddev) {
    if (stddev == 0.0) return 0.0;
    if (have_spare_) {
        have_spare_ = false;
        return spare_ * stddev;
    }
    const double u1 = 1.0 - uniform01();  // (0,1], keeps log finite
    const double u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang) * stddev;
}

double rss_at_distance(const PathLossModel& model, double d) {
    model.validate();
    if (!std::isfinite(d)) throw ConfigError("distance must be finite");
    const double dc = std::max(d, model.d0);
    return model.tx_power - model.pl0 - 10.0 * model.exponent * std::log10(dc / model.d0);
}

double distance_of(const PathLossModel& model, double r) {
    model.validate();
    if (!std::isfinite(r)) throw ConfigError("RSS must be finite");
    const double near_field = model.tx_power - model.pl0;
    if (r >= near_field) return model.d0;
    return model.d0 * std::pow(10.0, (near_field - r) / (10.0 * model.exponent));
}

int count_obstructions(const Scenario& sc, const Antenna& a, const Point& p) {
    int n = 0;
    for (const auto& o : sc.obstacles)
        if (segment_crosses_interior(a.position, p, o.rect)) ++n;
    return n;
}

namespace {

Measurement simulate_with_noise_seed(const Scenario& sc, const Point& p,
                                     std::uint64_t noise_seed) {
    GaussianDraws noise(noise_seed);
    // (rss, id) candidates; noise is drawn for every antenna in id order
    // before top-k truncation so consumption order is fixed.
    std::vector<std::pair<double, int>> cand;
    cand.reserve(sc.antennas.size());
    for (const auto& a : sc.antennas) {
        const double d = (a.position - p).norm();
        double rss = rss_at_distance(sc.model, d);
        for (const auto& o : sc.obstacles)
            if (segment_crosses_interior(a.position, p, o.rect)) rss -= o.penalty;
        rss -= noise.next(sc.noise_std);
        cand.emplace_back(rss, a.id);
    }
    std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
    });
    if (cand.size() > static_cast<std::size_t>(sc.top_k)) cand.resize(sc.top_k);
    Measurement m;
    for (const auto& [rss, id] : cand) m.readings[id] = rss;
    return m;
}

double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

Measurement simulate_measurement(const Scenario& sc, const Point& p,
                                 std::uint64_t draw_index) {
    return simulate_with_noise_seed(sc, p, mix_seed(sc.rng_seed, draw_index));
}

std::vector<LocatedSample> generate_dataset(const Scenario& sc, const Sampling& sampling,
                                            std::uint64_t seed) {
    std::vector<LocatedSample> out;
    if (sampling.kind == Sampling::Kind::GridPoints) {
        if (sampling.nx < 1 || sampling.ny < 1)
            throw ConfigError("grid sampling needs nx >= 1 and ny >= 1");
        const double sx = sc.extent.width() / static_cast<double>(sampling.nx);
        const double sy = sc.extent.height() / static_cast<double>(sampling.ny);
        out.reserve(static_cast<std::size_t>(sampling.nx * sampling.ny));
        std::int64_t idx = 0;
        for (std::int64_t iy = 0; iy < sampling.ny; ++iy)
            for (std::int64_t ix = 0; ix < sampling.nx; ++ix) {
                const Point p(sc.extent.xmin + (static_cast<double>(ix) + 0.5) * sx,
                              sc.extent.ymin + (static_cast<double>(iy) + 0.5) * sy);
                LocatedSample s;
                s.id = idx + 1;
                s.position = p;
                s.measurement = simulate_with_noise_seed(
                    sc, p, mix_seed(seed, static_cast<std::uint64_t>(2 * idx + 1)));
                out.push_back(std::move(s));
                ++idx;
            }
    } else {
        if (sampling.count < 1) throw ConfigError("random sampling needs count >= 1");
        out.reserve(static_cast<std::size_t>(sampling.count));
        for (std::int64_t i = 0; i < sampling.count; ++i) {
            std::mt19937_64 pos(mix_seed(seed, static_cast<std::uint64_t>(2 * i)));
            const Point p(sc.extent.xmin + uniform01(pos) * sc.extent.width(),
                          sc.extent.ymin + uniform01(pos) * sc.extent.height());
            LocatedSample s;
            s.id = i + 1;
            s.position = p;
            s.measurement = simulate_with_noise_seed(
                sc, p, mix_seed(seed, static_cast<std::uint64_t>(2 * i + 1)));
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace llgeo
