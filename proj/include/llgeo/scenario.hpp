#ifndef LLGEO_SCENARIO_HPP
#define LLGEO_SCENARIO_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "llgeo/common.hpp"
#include "llgeo/geometry.hpp"
#include "llgeo/measurement.hpp"

namespace llgeo {

struct Antenna {
    int id = 0;
    Point position{0.0, 0.0};
};

struct Obstacle {
    Rect rect;
    double penalty = 20.0;  // attenuation per crossing, dB
};

// Log-distance path loss: rss(d) = tx_power - pl0 - 10*exponent*log10(d/d0).
// Strictly decreasing for d >= d0, hence invertible there; distances below
// d0 are clamped to d0 (near field).
struct PathLossModel {
    double tx_power = 0.0;   // dBm
    double pl0 = 40.0;       // loss at d0, dB
    double exponent = 3.5;   // dimensionless
    double d0 = 1.0;         // reference distance, m

    void validate() const {
        if (!(exponent > 0.0)) throw ConfigError("path-loss exponent must be > 0");
        if (!(d0 > 0.0)) throw ConfigError("path-loss d0 must be > 0");
        if (!std::isfinite(tx_power) || !std::isfinite(pl0))
            throw ConfigError("path-loss tx_power and pl0 must be finite");
    }
};

struct Scenario {
    std::vector<Antenna> antennas;
    std::vector<Obstacle> obstacles;
    PathLossModel model;
    double noise_std = 1.0;          // receiver noise std, dB
    int top_k = 20;                  // strongest readings retained per sample
    std::uint64_t rng_seed = 0;
    Rect extent{0.0, 0.0, 1000.0, 1000.0};  // sampling domain

    // Sorts antennas by id and checks every invariant. Must be called after
    // construction/loading; all simulation entry points assume it ran.
    void normalize();

    const Antenna* find_antenna(int id) const;
};

// Deterministic stream of N(0, std^2) draws: mt19937_64 + Box-Muller,
// fully specified here so outputs are stable across platforms (libstdc++'s
// std::normal_distribution is not pinned by the standard).
class GaussianDraws {
public:
    explicit GaussianDraws(std::uint64_t seed) : gen_(seed) {}
    double next(double stddev);

private:
    double uniform01();  // [0,1)
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

double rss_at_distance(const PathLossModel& model, double d);
double distance_of(const PathLossModel& model, double r);

// Number of obstacles whose interior the open segment antenna->p crosses.
int count_obstructions(const Scenario& sc, const Antenna& a, const Point& p);

// One simulated sparse RSS vector at p. draw_index selects this sample's
// noise stream; the result is a pure function of (scenario, p, draw_index).
Measurement simulate_measurement(const Scenario& sc, const Point& p,
                                 std::uint64_t draw_index = 0);

struct Sampling {
    enum class Kind { GridPoints, UniformRandom };
    Kind kind = Kind::UniformRandom;
    std::int64_t nx = 0, ny = 0;  // GridPoints: centers of an nx-by-ny subdivision
    std::int64_t count = 0;       // UniformRandom: number of samples
};

// Deterministic for a fixed seed regardless of execution order; sample ids
// are 1-based in enumeration order (grid: row-major from the lower-left).
std::vector<LocatedSample> generate_dataset(const Scenario& sc, const Sampling& sampling,
                                            std::uint64_t seed);

}  // namespace llgeo

#endif
