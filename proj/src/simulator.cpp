#include "georeg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "georeg/rigid_align.hpp"
#include "georeg/util.hpp"

namespace georeg {

std::uint64_t Rng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::gauss() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Point2 Rng::disc(double radius) {
    const double r = radius * std::sqrt(uniform());
    const double a = 2.0 * kPi * uniform();
    return {r * std::cos(a), r * std::sin(a)};
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
    Rng mixer(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    return mixer.next_u64();
}

namespace {

struct Script {
    Pose2 start;
    std::vector<std::pair<double, double>> steps;  // (v, omega) held over one dt
    std::vector<double> waypoint_times;            // arrival time at each waypoint
};

// Turn-in-place then drive-straight legs, each quantized to whole odometry
// intervals so the midpoint unicycle model integrates the path exactly.
Script build_script(const std::vector<Point2>& wps, double speed, double turn_rate, double dt) {
    if (wps.size() < 2) throw ConfigError("waypoints: need at least two");
    if (speed <= 0.0) throw ConfigError("speed: must be > 0");
    if (turn_rate <= 0.0) throw ConfigError("turn_rate: must be > 0");
    if (dt <= 0.0) throw ConfigError("odom_rate_hz: must be > 0");

    Script script;
    double heading = std::atan2(wps[1].y - wps[0].y, wps[1].x - wps[0].x);
    script.start = Pose2(wps[0].x, wps[0].y, heading);
    script.waypoint_times.push_back(0.0);

    for (std::size_t i = 1; i < wps.size(); ++i) {
        const Point2 leg = wps[i] - wps[i - 1];
        const double dist = leg.norm();
        if (dist < 1e-9) {
            script.waypoint_times.push_back(script.steps.size() * dt);
            continue;
        }
        const double psi = std::atan2(leg.y, leg.x);
        const double dtheta = normalize_angle(psi - heading);
        if (std::abs(dtheta) > 1e-12) {
            const int n = std::max(1, static_cast<int>(std::ceil(std::abs(dtheta) / (turn_rate * dt))));
            const double omega = dtheta / (n * dt);
            for (int k = 0; k < n; ++k) script.steps.emplace_back(0.0, omega);
            heading = psi;
        }
        const int n = std::max(1, static_cast<int>(std::ceil(dist / (speed * dt))));
        const double v = dist / (n * dt);
        for (int k = 0; k < n; ++k) script.steps.emplace_back(v, 0.0);
        script.waypoint_times.push_back(script.steps.size() * dt);
    }
    return script;
}

bool in_window(double t, const std::vector<std::pair<double, double>>& windows) {
    for (const auto& [a, b] : windows)
        if (t >= a && t <= b) return true;
    return false;
}

Point2 bias_for_tile(const SimConfig& config, int ix, int iy) {
    if (config.aerial.bias_max <= 0.0) return {0.0, 0.0};
    Rng tile_rng(Rng::derive(config.seed, 6) ^
                 Rng::derive(static_cast<std::uint64_t>(ix) * 0x100000001b3ULL +
                                 static_cast<std::uint64_t>(iy),
                             7));
    const double mag = tile_rng.uniform(config.aerial.bias_min, config.aerial.bias_max);
    const double ang = 2.0 * kPi * tile_rng.uniform();
    return {mag * std::cos(ang), mag * std::sin(ang)};
}

Point2 path_point_at_arc(const std::vector<std::pair<double, Pose2>>& path,
                         const std::vector<double>& cum_arc, double s, double* heading) {
    auto it = std::lower_bound(cum_arc.begin(), cum_arc.end(), s);
    std::size_t j = it == cum_arc.end() ? cum_arc.size() - 1
                                        : static_cast<std::size_t>(it - cum_arc.begin());
    if (j == 0) j = 1;
    const Pose2& a = path[j - 1].second;
    const Pose2& b = path[j].second;
    const double seg = cum_arc[j] - cum_arc[j - 1];
    const double f = seg > 0.0 ? (s - cum_arc[j - 1]) / seg : 0.0;
    if (heading) *heading = b.theta;
    return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
}

}  // namespace

SimConfig preset_config(const std::string& name) {
    SimConfig cfg;
    if (name == "loop") {
        cfg.preset = PathPreset::loop;
        cfg.waypoints = {{0, 0}, {150, 0}, {150, 80}, {0, 80}, {0, 0}};
    } else if (name == "figure8") {
        cfg.preset = PathPreset::figure8;
        cfg.waypoints = {{0, 0},  {90, 0},  {90, 60},  {0, 60},  {0, 0},
                         {-90, 0}, {-90, -60}, {0, -60}, {0, 0}};
    } else if (name == "campus") {
        // Two laps around a block with an underground passage between them.
        cfg.preset = PathPreset::campus;
        cfg.waypoints = {{0, 0},    {280, 0},  {280, 140}, {0, 140}, {0, 0},
                         {90, -50}, {190, -50}, {280, 0},  {280, 140}, {0, 140},
                         {0, 0}};
        cfg.origin = MapOrigin{334200.0, 6251000.0, "56S"};
        const Script script =
            build_script(cfg.waypoints, cfg.speed, cfg.turn_rate, 1.0 / cfg.odom_rate_hz);
        // GPS is garbage from just before the passage entrance to just after
        // the exit (waypoints 5 and 6).
        cfg.gps.outage_windows = {{script.waypoint_times[5] - 25.0, script.waypoint_times[6] + 25.0}};
        cfg.pole_density = 3.0;
        cfg.aerial.label_fraction = 0.85;
    } else if (name == "waypoints") {
        cfg.preset = PathPreset::waypoints;
    } else {
        throw ConfigError("preset: unknown preset '" + name + "'");
    }
    return cfg;
}

SimOutput generate(const SimConfig& config) {
    if (config.waypoints.size() < 2)
        throw ConfigError("waypoints: path is empty (need at least two waypoints)");
    if (config.odom_rate_hz <= 0.0) throw ConfigError("odom_rate_hz: must be > 0");
    if (config.keyframe_spacing <= 0.0) throw ConfigError("keyframe_spacing: must be > 0");
    if (config.aerial.label_fraction < 0.0 || config.aerial.label_fraction > 1.0)
        throw ConfigError("label_fraction: must be in [0, 1]");
    if (config.gps.rate_hz <= 0.0) throw ConfigError("gps_rate_hz: must be > 0");

    if (config.aerial.bias_min < 0.0 || config.aerial.bias_max < config.aerial.bias_min)
        throw ConfigError("tile_bias_min/tile_bias_max: need 0 <= min <= max");

    const double dt = 1.0 / config.odom_rate_hz;
    const Script script = build_script(config.waypoints, config.speed, config.turn_rate, dt);
    const std::size_t n_steps = script.steps.size();

    SimOutput out;
    SimWorld& world = out.world;

    // Ground truth on the odometry grid.
    world.truth_path.reserve(n_steps + 1);
    world.truth_path.emplace_back(0.0, script.start);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const Pose2 next = unicycle_step(world.truth_path.back().second, script.steps[k].first,
                                         script.steps[k].second, dt);
        world.truth_path.emplace_back((k + 1) * dt, next);
    }

    std::vector<double> cum_arc(world.truth_path.size(), 0.0);
    for (std::size_t k = 1; k < world.truth_path.size(); ++k)
        cum_arc[k] = cum_arc[k - 1] + (world.truth_path[k].second.translation() -
                                       world.truth_path[k - 1].second.translation())
                                          .norm();
    const double total_len = cum_arc.back();

    // Noisy odometry stream: sample k holds from t_k to t_{k+1}.
    Rng odom_rng(Rng::derive(config.seed, 0));
    out.odom.reserve(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double v = script.steps[k].first + config.odom_noise.sigma_v * odom_rng.gauss();
        const double w = script.steps[k].second + config.odom_noise.sigma_omega * odom_rng.gauss();
        out.odom.push_back({k * dt, v, w});
    }

    // Dead-reckoned path in the local frame (starts at identity).
    std::vector<Pose2> dr(world.truth_path.size());
    dr[0] = Pose2();
    for (std::size_t k = 0; k < n_steps; ++k)
        dr[k + 1] = unicycle_step(dr[k], out.odom[k].v, out.odom[k].omega, dt);

    // Keyframes every keyframe_spacing meters of travel.
    std::vector<std::size_t> kf_index;
    kf_index.push_back(0);
    double next_kf = config.keyframe_spacing;
    for (std::size_t k = 1; k < world.truth_path.size(); ++k) {
        if (cum_arc[k] >= next_kf) {
            kf_index.push_back(k);
            next_kf = (std::floor(cum_arc[k] / config.keyframe_spacing) + 1.0) *
                      config.keyframe_spacing;
        }
    }
    if (kf_index.back() != world.truth_path.size() - 1)
        kf_index.push_back(world.truth_path.size() - 1);
    for (const std::size_t k : kf_index)
        world.truth_keyframes.push_back(world.truth_path[k]);

    // Poles scattered alongside the path.
    Rng pole_rng(Rng::derive(config.seed, 2));
    const int n_poles =
        config.pole_density > 0.0
            ? static_cast<int>(std::lround(config.pole_density * total_len / 100.0))
            : 0;
    for (int p = 0; p < n_poles; ++p) {
        const double s = pole_rng.uniform() * total_len;
        const double side = pole_rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double lateral = pole_rng.uniform(2.0, 10.0);
        double heading = 0.0;
        const Point2 on_path = path_point_at_arc(world.truth_path, cum_arc, s, &heading);
        const Point2 pos{on_path.x - side * lateral * std::sin(heading),
                         on_path.y + side * lateral * std::cos(heading)};
        world.poles.emplace_back(p, pos);
    }

    // Initial graph: keyframe poses from dead reckoning, first pose fixed.
    PoseGraph& graph = out.initial_graph;
    for (std::size_t i = 0; i < kf_index.size(); ++i)
        graph.add_pose(static_cast<VertexId>(i), dr[kf_index[i]], i == 0);

    // Effective sigmas are floored so zero-noise worlds still carry valid
    // (finite) information matrices.
    const double sv = std::max(config.odom_noise.sigma_v, 1e-3);
    const double sw = std::max(config.odom_noise.sigma_omega, 1e-4);
    for (std::size_t i = 1; i < kf_index.size(); ++i) {
        const double n = static_cast<double>(kf_index[i] - kf_index[i - 1]);
        const double sxy = sv * dt * std::sqrt(n);
        const double sth = sw * dt * std::sqrt(n);
        Info3 info = Info3::Zero();
        info(0, 0) = info(1, 1) = 1.0 / (sxy * sxy);
        info(2, 2) = 1.0 / (sth * sth);
        const Pose2 meas = compose(inverse(dr[kf_index[i - 1]]), dr[kf_index[i]]);
        graph.add_edge(RelPoseEdge{static_cast<VertexId>(i - 1), static_cast<VertexId>(i), meas, info});
    }

    // Landmark observations from keyframes, truth-based visibility.
    Rng obs_rng(Rng::derive(config.seed, 4));
    const double obs_sigma = std::max(config.landmark_obs.sigma, 1e-3);
    Info2 obs_info = Info2::Identity() / (obs_sigma * obs_sigma);
    std::vector<bool> pole_seen(world.poles.size(), false);
    for (std::size_t i = 0; i < kf_index.size(); ++i) {
        const Pose2& truth_pose = world.truth_path[kf_index[i]].second;
        for (const auto& [pid, pos] : world.poles) {
            if ((pos - truth_pose.translation()).norm() > config.landmark_obs.max_range) continue;
            Point2 meas = inverse_transform_point(truth_pose, pos);
            meas.x += config.landmark_obs.sigma * obs_rng.gauss();
            meas.y += config.landmark_obs.sigma * obs_rng.gauss();
            out.observations.push_back({static_cast<int>(i), pid, meas});
            const VertexId lm_id = kLandmarkIdBase + pid;
            if (!pole_seen[pid]) {
                pole_seen[pid] = true;
                graph.add_landmark(lm_id, transform_point(graph.pose(static_cast<VertexId>(i)).estimate, meas),
                                   LandmarkKind::pole);
            }
            graph.add_edge(LandmarkObsEdge{static_cast<VertexId>(i), lm_id, meas, obs_info});
        }
    }

    // Optional loop-closure constraints between revisited keyframes.
    if (config.loop_closure.enabled) {
        Rng lc_rng(Rng::derive(config.seed, 5));
        const double lxy = std::max(config.loop_closure.sigma_xy, 1e-3);
        const double lth = std::max(config.loop_closure.sigma_theta, 1e-4);
        Info3 lc_info = Info3::Zero();
        lc_info(0, 0) = lc_info(1, 1) = 1.0 / (lxy * lxy);
        lc_info(2, 2) = 1.0 / (lth * lth);
        std::ptrdiff_t last_lc = -10;
        for (std::size_t j = 0; j < kf_index.size(); ++j) {
            if (static_cast<std::ptrdiff_t>(j) - last_lc < 5) continue;
            for (std::size_t i = 0; i + config.loop_closure.min_separation < j; ++i) {
                const Pose2& ti = world.truth_path[kf_index[i]].second;
                const Pose2& tj = world.truth_path[kf_index[j]].second;
                if ((tj.translation() - ti.translation()).norm() > config.loop_closure.radius)
                    continue;
                Pose2 rel = compose(inverse(ti), tj);
                rel = compose(rel, Pose2(config.loop_closure.sigma_xy * lc_rng.gauss(),
                                         config.loop_closure.sigma_xy * lc_rng.gauss(),
                                         config.loop_closure.sigma_theta * lc_rng.gauss()));
                graph.add_edge(RelPoseEdge{static_cast<VertexId>(i), static_cast<VertexId>(j), rel, lc_info});
                last_lc = static_cast<std::ptrdiff_t>(j);
                break;
            }
        }
    }

    // GPS stream on the odometry grid, map frame plus the origin offset.
    Rng gps_rng(Rng::derive(config.seed, 1));
    const std::size_t gps_every = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(config.odom_rate_hz / config.gps.rate_hz)));
    const double gps_dt = gps_every * dt;
    Point2 bias{0.0, 0.0};
    for (std::size_t k = 0; k < world.truth_path.size(); k += gps_every) {
        const double t = world.truth_path[k].first;
        const Point2 truth = world.truth_path[k].second.translation();
        bias.x += config.gps.bias_walk_sigma * std::sqrt(gps_dt) * gps_rng.gauss();
        bias.y += config.gps.bias_walk_sigma * std::sqrt(gps_dt) * gps_rng.gauss();
        const double outlier_draw = gps_rng.uniform();
        const bool outlier =
            in_window(t, config.gps.outage_windows) || outlier_draw < config.gps.outlier_rate;
        Point2 pos;
        if (outlier) {
            pos = truth + gps_rng.disc(config.gps.outlier_magnitude);
        } else {
            pos = truth + bias;
            pos.x += config.gps.sigma * gps_rng.gauss();
            pos.y += config.gps.sigma * gps_rng.gauss();
        }
        const Point2 utm = map_to_utm(pos, config.origin);
        out.gps.push_back({t, utm.x, utm.y, config.gps.sigma, outlier});
    }

    // Aerial tiles covering the world, and labels for a fraction of the
    // poles that were actually observed.
    double min_x = script.start.x, max_x = script.start.x;
    double min_y = script.start.y, max_y = script.start.y;
    auto grow = [&](const Point2& p) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    };
    for (const auto& [t, p] : world.truth_path) grow(p.translation());
    for (const auto& [pid, p] : world.poles) grow(p);
    const double ts = config.aerial.tile_size;
    if (ts <= 0.0) throw ConfigError("tile_size: must be > 0");
    const Point2 lo_utm = map_to_utm({min_x, min_y}, config.origin);
    const Point2 hi_utm = map_to_utm({max_x, max_y}, config.origin);
    for (int iy = static_cast<int>(std::floor(lo_utm.y / ts));
         iy <= static_cast<int>(std::floor(hi_utm.y / ts)); ++iy)
        for (int ix = static_cast<int>(std::floor(lo_utm.x / ts));
             ix <= static_cast<int>(std::floor(hi_utm.x / ts)); ++ix)
            world.tile_biases.push_back({ix, iy, bias_for_tile(config, ix, iy)});

    Rng label_rng(Rng::derive(config.seed, 3));
    std::vector<int> visible;
    for (std::size_t p = 0; p < pole_seen.size(); ++p)
        if (pole_seen[p]) visible.push_back(static_cast<int>(p));
    for (std::size_t i = visible.size(); i > 1; --i)
        std::swap(visible[i - 1], visible[label_rng.next_u64() % i]);
    const std::size_t n_labels =
        static_cast<std::size_t>(std::lround(config.aerial.label_fraction * visible.size()));
    std::vector<int> chosen(visible.begin(), visible.begin() + std::min(n_labels, visible.size()));
    std::sort(chosen.begin(), chosen.end());
    for (const int pid : chosen) {
        const Point2& truth = world.poles[pid].second;
        world.labels.emplace_back(pid, truth + tile_bias_at(config, truth));
    }

    return out;
}

Point2 tile_bias_at(const SimConfig& config, const Point2& map_point) {
    const Point2 utm = map_to_utm(map_point, config.origin);
    const double ts = config.aerial.tile_size;
    const int ix = static_cast<int>(std::floor(utm.x / ts));
    const int iy = static_cast<int>(std::floor(utm.y / ts));
    return bias_for_tile(config, ix, iy);
}

std::vector<double> drift_of(const std::vector<Pose2>& estimated, const std::vector<Pose2>& truth) {
    if (estimated.size() != truth.size())
        throw StructureError("drift_of: pose counts differ");
    CorrespondenceSet c;
    c.pairs.reserve(estimated.size());
    for (std::size_t i = 0; i < estimated.size(); ++i)
        c.pairs.push_back({estimated[i].translation(), truth[i].translation(), 1.0});
    const Pose2 T = fit_se2(c);
    std::vector<double> errors(estimated.size());
    for (std::size_t i = 0; i < estimated.size(); ++i)
        errors[i] = (transform_point(T, estimated[i].translation()) - truth[i].translation()).norm();
    return errors;
}

SimConfig load_sim_config(const std::string& path, SimConfig base) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);

    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos || line[begin] == '#') continue;
        const std::size_t eq = line.find('=', begin);
        if (eq == std::string::npos)
            throw ParseError(path, line_no, static_cast<int>(begin) + 1, "expected key=value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        entries.emplace_back(trim(line.substr(begin, eq - begin)), trim(line.substr(eq + 1)));
    }

    // A preset key rebases the whole config before other keys apply.
    for (const auto& [key, value] : entries)
        if (key == "preset") base = preset_config(value);

    auto to_double = [](const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError(key + ": bad numeric value '" + v + "'");
        }
    };
    auto to_points = [&](const std::string& key, const std::string& v) {
        std::vector<Point2> pts;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ';')) {
            const std::size_t comma = item.find(',');
            if (comma == std::string::npos) throw ConfigError(key + ": expected x,y pairs");
            pts.emplace_back(to_double(key, item.substr(0, comma)),
                             to_double(key, item.substr(comma + 1)));
        }
        return pts;
    };
    auto to_windows = [&](const std::string& key, const std::string& v) {
        std::vector<std::pair<double, double>> w;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ';')) {
            const std::size_t colon = item.find(':');
            if (colon == std::string::npos) throw ConfigError(key + ": expected t_start:t_end");
            w.emplace_back(to_double(key, item.substr(0, colon)),
                           to_double(key, item.substr(colon + 1)));
        }
        return w;
    };

    for (const auto& [key, value] : entries) {
        if (key == "preset") continue;  // handled above
        else if (key == "seed") {
            try {
                base.seed = static_cast<std::uint64_t>(std::stoull(value));
            } catch (const std::exception&) {
                throw ConfigError("seed: bad value '" + value + "'");
            }
        }
        else if (key == "waypoints") { base.waypoints = to_points(key, value); base.preset = PathPreset::waypoints; }
        else if (key == "speed") base.speed = to_double(key, value);
        else if (key == "turn_rate") base.turn_rate = to_double(key, value);
        else if (key == "odom_rate_hz") base.odom_rate_hz = to_double(key, value);
        else if (key == "keyframe_spacing") base.keyframe_spacing = to_double(key, value);
        else if (key == "pole_density") base.pole_density = to_double(key, value);
        else if (key == "odom_sigma_v") base.odom_noise.sigma_v = to_double(key, value);
        else if (key == "odom_sigma_omega") base.odom_noise.sigma_omega = to_double(key, value);
        else if (key == "gps_rate_hz") base.gps.rate_hz = to_double(key, value);
        else if (key == "gps_sigma") base.gps.sigma = to_double(key, value);
        else if (key == "gps_bias_walk_sigma") base.gps.bias_walk_sigma = to_double(key, value);
        else if (key == "gps_outage") base.gps.outage_windows = to_windows(key, value);
        else if (key == "gps_outlier_rate") base.gps.outlier_rate = to_double(key, value);
        else if (key == "gps_outlier_magnitude") base.gps.outlier_magnitude = to_double(key, value);
        else if (key == "tile_size") base.aerial.tile_size = to_double(key, value);
        else if (key == "tile_bias_min") base.aerial.bias_min = to_double(key, value);
        else if (key == "tile_bias_max") base.aerial.bias_max = to_double(key, value);
        else if (key == "label_fraction") base.aerial.label_fraction = to_double(key, value);
        else if (key == "obs_max_range") base.landmark_obs.max_range = to_double(key, value);
        else if (key == "obs_sigma") base.landmark_obs.sigma = to_double(key, value);
        else if (key == "loop_closures") base.loop_closure.enabled = value == "1" || value == "true";
        else if (key == "lc_radius") base.loop_closure.radius = to_double(key, value);
        else if (key == "lc_sigma_xy") base.loop_closure.sigma_xy = to_double(key, value);
        else if (key == "lc_sigma_theta") base.loop_closure.sigma_theta = to_double(key, value);
        else if (key == "lc_min_separation") base.loop_closure.min_separation = static_cast<int>(to_double(key, value));
        else if (key == "origin_easting") base.origin.easting_offset = to_double(key, value);
        else if (key == "origin_northing") base.origin.northing_offset = to_double(key, value);
        else if (key == "origin_zone") base.origin.zone_label = value;
        else throw ConfigError("unknown config key: " + key);
    }
    return base;
}

}  // namespace georeg
