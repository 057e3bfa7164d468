#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "georeg/graph.hpp"
#include "georeg/se2.hpp"
#include "georeg/ukf.hpp"

namespace georeg {

// Counter-based generator (splitmix64) so identical seeds reproduce identical
// streams on any platform. Gaussians are Box-Muller over two uniforms, drawn
// in that order; disc samples draw radius then angle.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)
    double gauss();                        // standard normal
    Point2 disc(double radius);            // uniform over a disc

    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

private:
    std::uint64_t state_;
};

struct OdomNoise {
    double sigma_v = 0.02;       // m/s per sample
    double sigma_omega = 0.004;  // rad/s per sample
};

struct GpsModel {
    double rate_hz = 1.0;
    double sigma = 5.0;               // white noise, m
    double bias_walk_sigma = 0.02;    // random walk, m / sqrt(s)
    std::vector<std::pair<double, double>> outage_windows;  // [t_start, t_end]
    double outlier_rate = 0.0;        // probability outside outage windows
    double outlier_magnitude = 1000.0;  // disc radius for outliers, m
};

struct AerialModel {
    double tile_size = 200.0;   // m
    double bias_min = 0.28;     // m, per-tile bias magnitude range
    double bias_max = 0.75;
    double label_fraction = 0.8;  // fraction of visible poles that get labels
};

struct LandmarkObsModel {
    double max_range = 15.0;  // m
    double sigma = 0.1;       // m, sensor-frame noise
};

struct LoopClosureModel {
    bool enabled = false;
    double radius = 3.0;        // m, keyframe revisit distance
    double sigma_xy = 0.05;     // m
    double sigma_theta = 0.005; // rad
    int min_separation = 50;    // keyframes between the pair
};

enum class PathPreset { loop, figure8, campus, waypoints };

struct SimConfig {
    std::uint64_t seed = 0;
    PathPreset preset = PathPreset::loop;
    std::vector<Point2> waypoints;  // used when preset == waypoints
    double speed = 2.0;             // m/s on straights
    double turn_rate = 0.8;         // rad/s on in-place turns
    double odom_rate_hz = 10.0;
    double keyframe_spacing = 2.0;  // m of travel between graph pose vertices
    double pole_density = 3.0;      // poles per 100 m of path
    OdomNoise odom_noise;
    GpsModel gps;
    AerialModel aerial;
    LandmarkObsModel landmark_obs;
    LoopClosureModel loop_closure;
    MapOrigin origin{0.0, 0.0, "local"};
};

// Fills waypoints (and, for campus, the underground outage window) for the
// named preset. Throws ConfigError for unknown names.
SimConfig preset_config(const std::string& name);

// Applies `key=value` lines from a config file on top of `base`. Unknown keys
// are ConfigErrors naming the key. Documented in the README.
SimConfig load_sim_config(const std::string& path, SimConfig base = {});

struct Observation {
    int pose_index = 0;  // keyframe index == pose vertex id
    int pole_id = 0;
    Point2 point;        // sensor frame
};

struct TileBias {
    int ix = 0;
    int iy = 0;
    Point2 bias;
};

struct SimWorld {
    std::vector<std::pair<double, Pose2>> truth_path;       // every odometry timestamp
    std::vector<std::pair<double, Pose2>> truth_keyframes;  // graph vertex ground truth
    std::vector<std::pair<int, Point2>> poles;              // (pole id, map-frame position)
    std::vector<TileBias> tile_biases;                      // tiles covering the world bounds
    std::vector<std::pair<int, Point2>> labels;             // (pole id, truth + tile bias)
};

struct SimOutput {
    SimWorld world;
    std::vector<OdomSample> odom;
    std::vector<GpsFix> gps;          // map-frame coordinates plus origin offset
    std::vector<Observation> observations;
    PoseGraph initial_graph;          // dead reckoning + observations, first pose fixed
};

// Landmark vertex ids in the initial graph are kLandmarkIdBase + pole_id;
// pose vertex ids equal the keyframe index.
inline constexpr VertexId kLandmarkIdBase = 1000000;

SimOutput generate(const SimConfig& config);

// Constant per-tile bias, deterministic in (seed, tile index).
Point2 tile_bias_at(const SimConfig& config, const Point2& map_point);

// Per-pose Euclidean error after the best rigid alignment of the estimated
// path onto the truth path, so the numbers measure shape distortion rather
// than the free gauge.
std::vector<double> drift_of(const std::vector<Pose2>& estimated, const std::vector<Pose2>& truth);

}  // namespace georeg
