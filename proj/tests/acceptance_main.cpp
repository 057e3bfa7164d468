// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Run with no arguments for everything, or name the criteria:
//
//   georeg_acceptance jacobians optimizer-oracle ...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "georeg/evaluation.hpp"
#include "georeg/graph_io.hpp"
#include "georeg/rigid_align.hpp"
#include "georeg/simulator.hpp"
#include "georeg/ukf.hpp"
#include "support/oracles.hpp"

using namespace georeg;

namespace {

struct Result {
    std::string name;
    bool pass = false;
    std::string details;
};

// ---------------------------------------------------------------------------
// shared helpers

PoseGraph random_mixed_graph(std::uint64_t seed, int n_poses, int n_landmarks) {
    Rng rng(seed);
    std::vector<Pose2> truth;
    truth.emplace_back();
    for (int i = 1; i < n_poses; ++i)
        truth.push_back(compose(
            truth.back(),
            Pose2(rng.uniform(1.0, 3.0), rng.uniform(-0.5, 0.5), rng.uniform(-0.6, 0.6))));
    std::vector<Point2> marks;
    for (int i = 0; i < n_landmarks; ++i)
        marks.emplace_back(rng.uniform(-5.0, 10.0), rng.uniform(-5.0, 10.0));

    PoseGraph g;
    for (int i = 0; i < n_poses; ++i)
        g.add_pose(i, Pose2(truth[i].x + 0.05 * rng.gauss(), truth[i].y + 0.05 * rng.gauss(),
                            truth[i].theta + 0.02 * rng.gauss()));
    for (int i = 0; i < n_landmarks; ++i)
        g.add_landmark(100 + i, Point2(marks[i].x + 0.05 * rng.gauss(),
                                       marks[i].y + 0.05 * rng.gauss()));

    Info3 odo = Info3::Zero();
    odo(0, 0) = odo(1, 1) = 25.0;
    odo(2, 2) = 100.0;
    for (int i = 0; i + 1 < n_poses; ++i) {
        Pose2 meas = compose(inverse(truth[i]), truth[i + 1]);
        meas = Pose2(meas.x + 0.02 * rng.gauss(), meas.y + 0.02 * rng.gauss(),
                     meas.theta + 0.01 * rng.gauss());
        g.add_edge(RelPoseEdge{i, i + 1, meas, odo});
    }
    Info2 obs = Info2::Identity() * 25.0;
    for (int l = 0; l < n_landmarks; ++l)
        for (int i = 0; i < n_poses; i += 2) {
            Point2 meas = inverse_transform_point(truth[i], marks[l]);
            meas.x += 0.02 * rng.gauss();
            meas.y += 0.02 * rng.gauss();
            g.add_edge(LandmarkObsEdge{i, 100 + l, meas, obs});
        }
    Info2 gps = Info2::Identity() / 25.0;
    for (int i = 0; i < n_poses; i += 3)
        g.add_edge(GpsPriorEdge{
            i, Point2(truth[i].x + 0.5 * rng.gauss(), truth[i].y + 0.5 * rng.gauss()), gps});
    if (n_landmarks > 0 && seed % 2 == 0)
        g.add_edge(AnchorPriorEdge{
            100, Point2(marks[0].x + 0.1 * rng.gauss(), marks[0].y + 0.1 * rng.gauss()),
            Info2::Identity() * 100.0});
    return g;
}

struct Registered {
    SimOutput out;
    PoseGraph graph;  // after gps-prior optimization
    OptimizeReport report;
};

// simulate -> filter -> join by keyframe time -> gps priors -> optimize
Registered register_with_gps(const SimConfig& cfg, double spacing = 10.0, double sigma = 5.0,
                             bool zero_noise_filter = false) {
    Registered r;
    r.out = generate(cfg);

    std::vector<GpsFix> fixes = r.out.gps;
    for (GpsFix& fix : fixes) {
        const Point2 p = utm_to_map({fix.easting, fix.northing}, cfg.origin);
        fix.easting = p.x;
        fix.northing = p.y;
    }

    FilterState init;
    init.t = r.out.odom.empty() ? 0.0 : r.out.odom.front().t;
    init.mean << 0.0, 0.0, 0.0;  // presets start at the map origin
    init.cov = Eigen::Matrix3d::Identity() * (zero_noise_filter ? 1e-12 : 4.0);
    init.cov(2, 2) = zero_noise_filter ? 1e-12 : 0.25;
    FilterConfig fcfg;
    if (zero_noise_filter) fcfg.process = ProcessNoise{0.0, 0.0};

    const FilterRun run = run_filter(r.out.odom, fixes, init, fcfg);

    std::vector<std::pair<VertexId, Point2>> joined;
    for (std::size_t i = 0; i < r.out.world.truth_keyframes.size(); ++i) {
        const double t = r.out.world.truth_keyframes[i].first;
        auto it = std::lower_bound(run.path.begin(), run.path.end(), t,
                                   [](const auto& e, double tv) { return e.first < tv; });
        std::size_t best = it == run.path.end() ? run.path.size() - 1
                                                : static_cast<std::size_t>(it - run.path.begin());
        if (best > 0 &&
            std::abs(run.path[best - 1].first - t) <= std::abs(run.path[best].first - t))
            best -= 1;
        if (std::abs(run.path[best].first - t) > 0.5) continue;
        joined.emplace_back(static_cast<VertexId>(i), run.path[best].second.translation());
    }

    r.graph = r.out.initial_graph;
    r.graph.clear_fixed();
    attach_gps_priors(r.graph, joined, spacing, sigma);
    r.report = optimize(r.graph);
    return r;
}

double mean_landmark_error(const PoseGraph& g, const SimOutput& out) {
    double sum = 0.0;
    long count = 0;
    for (const LandmarkVertex& lm : g.landmarks()) {
        const int pid = static_cast<int>(lm.id - kLandmarkIdBase);
        sum += (lm.estimate - out.world.poles[pid].second).norm();
        ++count;
    }
    return count > 0 ? sum / count : 0.0;
}

// two workers keep the box responsive while halving the wall time
template <typename Fn>
std::vector<std::invoke_result_t<Fn, std::uint64_t>> over_seeds(int n_seeds, Fn fn) {
    using R = std::invoke_result_t<Fn, std::uint64_t>;
    std::vector<std::future<R>> futures;
    futures.reserve(n_seeds);
    for (int s = 0; s < n_seeds; ++s)
        futures.push_back(std::async(std::launch::async | std::launch::deferred, fn,
                                     static_cast<std::uint64_t>(s)));
    std::vector<R> results;
    results.reserve(n_seeds);
    for (auto& f : futures) results.push_back(f.get());
    return results;
}

// ---------------------------------------------------------------------------
// criteria

std::vector<Result> run_jacobians() {
    int counts[4] = {0, 0, 0, 0};
    double worst = 0.0;
    for (std::uint64_t seed = 0; counts[0] < 100 || counts[1] < 100 || counts[2] < 100 ||
                                 counts[3] < 100;
         ++seed) {
        const PoseGraph g = random_mixed_graph(seed, 5, 3);
        for (const Edge& e : g.edges()) {
            const int type = static_cast<int>(e.index());
            if (counts[type] >= 100) continue;
            ++counts[type];
            for (const JacobianBlock& block : linearize(e, g)) {
                const Eigen::MatrixXd fd = oracle::fd_jacobian(g, e, block.vertex, 1e-7);
                const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
                worst = std::max(worst, (block.jac - fd).cwiseAbs().maxCoeff() / scale);
            }
        }
    }
    std::ostringstream d;
    d << "worst relative error " << worst << " over 100 points per edge type";
    return {{"jacobians", worst < 1e-6, d.str()}};
}

std::vector<Result> run_optimizer_oracle() {
    double worst = 0.0;
    double worst_signed = 0.0;  // positive when lm is above the oracle minimum
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed * 7 + 1);
        const int n_poses = 4 + static_cast<int>(rng.next_u64() % 5);      // 4..8
        const int n_marks = 1 + static_cast<int>(rng.next_u64() % 4);      // 1..4
        PoseGraph g = random_mixed_graph(seed + 1000, n_poses, n_marks);

        const Eigen::VectorXd x0 = oracle::get_free_params(g);
        auto cost = [&](const Eigen::VectorXd& x) { return oracle::chi2_at(g, x); };
        double oracle_best = std::numeric_limits<double>::infinity();
        Rng start_rng(seed);
        for (int restart = 0; restart < 6; ++restart) {
            Eigen::VectorXd x = x0;
            for (Eigen::Index i = 0; restart > 0 && i < x.size(); ++i)
                x(i) += 0.02 * start_rng.gauss();
            double value = oracle::nelder_mead(cost, x, 0.1, 12000);
            // shrink-restart until the simplex stops finding anything
            for (int round = 0; round < 8; ++round) {
                double improved = value;
                for (const double step : {1e-2, 1e-3, 1e-4, 1e-5})
                    improved = oracle::nelder_mead(cost, x, step, 6000);
                if (value - improved < 1e-10) {
                    value = improved;
                    break;
                }
                value = improved;
            }
            oracle_best = std::min(oracle_best, value);
        }

        const OptimizeReport report = optimize(g);
        if (report.converged) ++solved;
        const double gap = report.final_chi2 - oracle_best;
        if (std::abs(gap) > worst) {
            worst = std::abs(gap);
            worst_signed = gap;
        }
    }
    std::ostringstream d;
    d << "worst lm-minus-oracle chi2 gap " << worst_signed << " over 20 graphs, " << solved
      << " converged";
    return {{"optimizer-oracle", worst < 1e-6 && solved == 20, d.str()}};
}

SimConfig zero_noise_campus() {
    SimConfig cfg = preset_config("campus");
    cfg.odom_noise = {0.0, 0.0};
    cfg.gps.sigma = 0.0;
    cfg.gps.bias_walk_sigma = 0.0;
    cfg.gps.outlier_rate = 0.0;
    cfg.gps.outage_windows.clear();
    cfg.aerial.bias_min = cfg.aerial.bias_max = 0.0;
    cfg.landmark_obs.sigma = 0.0;
    return cfg;
}

std::vector<Result> run_zero_noise() {
    SimConfig cfg = zero_noise_campus();
    Registered reg = register_with_gps(cfg, 10.0, 5.0, /*zero_noise_filter=*/true);

    std::vector<Point2> labels;
    for (const auto& [pid, label] : reg.out.world.labels) labels.push_back(label);
    const auto matches = match_labels(reg.graph, labels, 3.0);
    std::vector<std::pair<VertexId, Point2>> anchors;
    for (const LabelMatch& m : matches) anchors.emplace_back(m.landmark, m.label);
    attach_anchor_priors(reg.graph, anchors, 0.1);
    optimize(reg.graph);

    double max_err = 0.0;
    for (const LandmarkVertex& lm : reg.graph.landmarks()) {
        const int pid = static_cast<int>(lm.id - kLandmarkIdBase);
        max_err = std::max(max_err, (lm.estimate - reg.out.world.poles[pid].second).norm());
    }
    std::ostringstream d;
    d << "max landmark error " << max_err << " m after anchoring " << matches.size()
      << " labels";
    return {{"zero-noise-e2e", max_err < 1e-6 && !matches.empty(), d.str()}};
}

std::vector<Result> run_loose_gps() {
    const auto errors = over_seeds(50, [](std::uint64_t seed) {
        SimConfig cfg = preset_config("campus");
        cfg.seed = seed;
        const Registered reg = register_with_gps(cfg);
        return mean_landmark_error(reg.graph, reg.out);
    });
    const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) / errors.size();
    std::ostringstream d;
    d << "mean landmark error " << mean << " m over 50 seeds (target [0.5, 3.0])";
    return {{"loose-gps-registration", mean >= 0.5 && mean <= 3.0, d.str()}};
}

SimConfig anchor_world(std::uint64_t seed) {
    SimConfig cfg;
    cfg.preset = PathPreset::waypoints;
    cfg.waypoints = {{0, 0}, {260, 0}, {260, 160}, {0, 160}, {0, 0}};
    cfg.seed = seed;
    cfg.keyframe_spacing = 3.0;
    cfg.pole_density = 8.0;
    cfg.aerial.tile_size = 150.0;
    cfg.aerial.bias_min = 0.28;
    cfg.aerial.bias_max = 0.75;
    cfg.aerial.label_fraction = 0.8;
    return cfg;
}

std::vector<Result> run_anchor_curve() {
    const std::vector<int> n_values = {0, 1, 2, 4, 8, 16, 32, 48};
    struct SeedOut {
        std::vector<double> curve;
        double single_plateau = 0.0;
        double cross_plateau = 0.0;
        bool ok = false;
        std::string error;
    };

    const auto seed_results = over_seeds(50, [&](std::uint64_t seed) {
        SeedOut so;
        try {
            const SimConfig cfg = anchor_world(seed);
            Registered reg = register_with_gps(cfg);

            std::vector<Point2> labels;
            for (const auto& [pid, label] : reg.out.world.labels) labels.push_back(label);
            const auto matched = match_labels(reg.graph, labels, 3.0);
            if (static_cast<int>(matched.size()) <= n_values.back()) {
                so.error = "only " + std::to_string(matched.size()) + " matched labels";
                return so;
            }

            EvalConfig ecfg;
            ecfg.n_values = n_values;
            ecfg.max_combinations = 8;
            ecfg.sample_seed = seed;
            ecfg.anchor_sigma = 0.1;
            const EvalReport report = evaluate_curve(reg.graph, matched, ecfg);
            for (const EvalRow& row : report.rows) so.curve.push_back(row.mean_holdout_error);
            so.cross_plateau = so.curve.back();

            // densest tile (map frame == UTM frame here, origin is zero)
            const double ts = cfg.aerial.tile_size;
            std::map<std::pair<int, int>, int> tile_count;
            for (const LabelMatch& m : matched) {
                const auto key = std::make_pair(static_cast<int>(std::floor(m.label.x / ts)),
                                                static_cast<int>(std::floor(m.label.y / ts)));
                ++tile_count[key];
            }
            auto best = std::max_element(tile_count.begin(), tile_count.end(),
                                         [](const auto& a, const auto& b) {
                                             return a.second < b.second;
                                         });
            const int inside = best->second;
            if (inside < 6) {
                so.error = "densest tile holds only " + std::to_string(inside) + " labels";
                return so;
            }
            EvalConfig scfg;
            scfg.n_values = {std::min(12, inside - 2)};
            scfg.max_combinations = 8;
            scfg.sample_seed = seed;
            scfg.anchor_sigma = 0.1;
            const double tile_x = best->first.first * ts, tile_y = best->first.second * ts;
            scfg.region_filter = {{tile_x, tile_y},
                                  {tile_x + ts, tile_y},
                                  {tile_x + ts, tile_y + ts},
                                  {tile_x, tile_y + ts}};
            const EvalReport single = evaluate_curve(reg.graph, matched, scfg);
            so.single_plateau = single.rows[0].mean_holdout_error;
            so.ok = true;
        } catch (const Error& e) {
            so.error = e.what();
        }
        return so;
    });

    std::vector<double> mean_curve(n_values.size(), 0.0);
    int ok_seeds = 0, single_lower = 0;
    std::string first_error;
    for (const SeedOut& so : seed_results) {
        if (!so.ok) {
            if (first_error.empty()) first_error = so.error;
            continue;
        }
        ++ok_seeds;
        for (std::size_t i = 0; i < mean_curve.size(); ++i) mean_curve[i] += so.curve[i];
        if (so.single_plateau < so.cross_plateau) ++single_lower;
    }
    for (double& v : mean_curve) v /= std::max(1, ok_seeds);

    std::vector<double> ns(n_values.begin(), n_values.end());
    const double rho = oracle::spearman_rho(ns, mean_curve);
    const double pvalue = oracle::spearman_pvalue_negative(ns, mean_curve);

    // uniform magnitudes in [0.28, 0.75]: rms = sqrt((b^3 - a^3) / (3 (b - a)))
    const double rms_bias = std::sqrt((std::pow(0.75, 3) - std::pow(0.28, 3)) / (3.0 * 0.47));
    const double plateau = mean_curve.back();

    std::ostringstream d1;
    d1 << "rho " << rho << ", p " << pvalue << ", plateau " << plateau << " m vs rms bias "
       << rms_bias << " m, n0 " << mean_curve.front() << " m, " << ok_seeds << "/50 seeds";
    if (!first_error.empty()) d1 << ", first failure: " << first_error;
    const bool curve_ok = ok_seeds == 50 && rho < 0.0 && pvalue < 0.01 &&
                          plateau <= 2.0 * rms_bias && plateau >= 0.5 * rms_bias;

    std::ostringstream d2;
    d2 << "single-tile plateau lower in " << single_lower << "/50 seeds (need >= 40)";
    return {{"anchor-curve", curve_ok, d1.str()},
            {"single-tile-vs-cross-tile", ok_seeds == 50 && single_lower >= 40, d2.str()}};
}

std::vector<Result> run_gate_calibration() {
    // threshold value
    const double threshold = chi_square_quantile(2, 0.95);
    const bool threshold_ok = std::abs(threshold - 5.9915) < 1e-3;

    // in-model rejection rate over 1e5 updates
    Rng rng(97);
    FilterConfig cfg;
    FilterState state;
    state.cov = Eigen::Matrix3d::Identity() * 0.5;
    Pose2 truth(0, 0, 0);
    const OdomSample u{0.0, 2.0, 0.02};
    const double gps_sigma = 5.0;
    long rejected = 0;
    const long total = 100000;
    for (long k = 0; k < total; ++k) {
        truth = unicycle_step(truth, u.v, u.omega, 1.0);
        truth = Pose2(truth.x + cfg.process.sigma_v * rng.gauss(),
                      truth.y + cfg.process.sigma_v * rng.gauss(),
                      truth.theta + cfg.process.sigma_omega * rng.gauss());
        state = predict(state, u, 1.0, cfg.process, cfg.ut);
        GpsFix fix{state.t, truth.x + gps_sigma * rng.gauss(), truth.y + gps_sigma * rng.gauss(),
                   gps_sigma};
        auto [next, decision] = update(state, fix, 0.95, cfg.ut, gps_sigma);
        state = next;
        if (!decision.accepted) ++rejected;
    }
    const double rate = static_cast<double>(rejected) / total;

    // every injected 1-km outlier is rejected
    FilterState s2;
    s2.cov = Eigen::Matrix3d::Identity() * 0.5;
    Pose2 truth2(0, 0, 0);
    long outliers = 0, outliers_rejected = 0;
    for (long k = 0; k < 2000; ++k) {
        truth2 = unicycle_step(truth2, u.v, u.omega, 1.0);
        s2 = predict(s2, u, 1.0, cfg.process, cfg.ut);
        GpsFix fix{s2.t, truth2.x, truth2.y, gps_sigma};
        if (k % 10 == 3) {
            const double angle = 2.0 * kPi * rng.uniform();
            fix.easting += 1000.0 * std::cos(angle);
            fix.northing += 1000.0 * std::sin(angle);
            ++outliers;
        } else {
            fix.easting += gps_sigma * rng.gauss();
            fix.northing += gps_sigma * rng.gauss();
        }
        auto [next, decision] = update(s2, fix, 0.95, cfg.ut, gps_sigma);
        s2 = next;
        if (k % 10 == 3 && !decision.accepted) ++outliers_rejected;
    }

    std::ostringstream d;
    d << "rate " << 100.0 * rate << "% (target 5 +- 1), outliers rejected " << outliers_rejected
      << "/" << outliers << ", threshold " << threshold;
    const bool pass = threshold_ok && rate >= 0.04 && rate <= 0.06 && outliers_rejected == outliers;
    return {{"ukf-gate-calibration", pass, d.str()}};
}

std::vector<Result> run_rigid_oracle() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(seed);
        const Pose2 T(rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-3, 3));
        CorrespondenceSet c;
        const int n = 10 + static_cast<int>(rng.next_u64() % 30);
        for (int i = 0; i < n; ++i) {
            const Point2 local(rng.uniform(-20, 20), rng.uniform(-20, 20));
            Point2 global = transform_point(T, local);
            global.x += 0.3 * rng.gauss();
            global.y += 0.3 * rng.gauss();
            c.pairs.push_back({local, global, rng.uniform(0.5, 2.0)});
        }
        const double fit = alignment_chi2(fit_se2(c), c);
        const double grid = oracle::rigid_grid_chi2(c);
        worst = std::max(worst, std::abs(fit - grid));
    }
    std::ostringstream d;
    d << "worst |fit - grid| chi2 gap " << worst << " over 50 sets";
    return {{"rigid-align-oracle", worst < 1e-9, d.str()}};
}

std::vector<Result> run_drift() {
    SimConfig base;
    base.preset = PathPreset::waypoints;
    base.waypoints = {{0, 0}, {120, 0}, {120, 80}, {240, 80}, {240, 0}, {360, 0}};
    base.pole_density = 0.0;
    base.odom_noise = {0.05, 0.01};

    struct SeedOut {
        double pure_mid, pure_end, gps_end;
    };
    const auto rows = over_seeds(50, [&](std::uint64_t seed) {
        SimConfig cfg = base;
        cfg.seed = seed;
        const SimOutput out = generate(cfg);

        PoseGraph pure = out.initial_graph;
        optimize(pure);
        std::vector<Pose2> est, truth;
        for (const auto& v : pure.poses()) est.push_back(v.estimate);
        for (const auto& [t, p] : out.world.truth_keyframes) truth.push_back(p);
        const std::vector<double> err = drift_of(est, truth);

        const Registered reg = register_with_gps(cfg);
        std::vector<Pose2> gps_est;
        for (const auto& v : reg.graph.poses()) gps_est.push_back(v.estimate);
        const std::vector<double> gps_err = drift_of(gps_est, truth);

        return SeedOut{err[err.size() / 2], err.back(), gps_err.back()};
    });

    double mid_sum = 0.0, end_sum = 0.0;
    int improved = 0;
    for (const SeedOut& row : rows) {
        mid_sum += row.pure_mid;
        end_sum += row.pure_end;
        if (row.gps_end < row.pure_end) ++improved;
    }
    std::ostringstream d;
    d << "mean end error " << end_sum / 50.0 << " m vs mid " << mid_sum / 50.0
      << " m; gps priors improved the end in " << improved << "/50 seeds (need >= 45)";
    return {{"drift-demonstration", end_sum > mid_sum && improved >= 45, d.str()}};
}

std::vector<Result> run_serialization() {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed + 12345);
        const PoseGraph g =
            random_mixed_graph(seed, 3 + static_cast<int>(rng.next_u64() % 6),
                               1 + static_cast<int>(rng.next_u64() % 4));
        const std::string text = graph_to_string(g);
        std::istringstream in(text);
        const PoseGraph back = read_graph(in, "roundtrip");
        if (graph_to_string(back) != text)
            return {{"serialization", false, "text mismatch at seed " + std::to_string(seed)}};
        if (back.poses().size() != g.poses().size() ||
            back.landmarks().size() != g.landmarks().size() ||
            back.edges().size() != g.edges().size())
            return {{"serialization", false, "size mismatch at seed " + std::to_string(seed)}};
        for (std::size_t i = 0; i < g.poses().size(); ++i) {
            const PoseVertex& a = g.poses()[i];
            const PoseVertex& b = back.poses()[i];
            if (a.id != b.id || a.fixed != b.fixed ||
                std::memcmp(&a.estimate, &b.estimate, sizeof(Pose2)) != 0)
                return {{"serialization", false, "pose bits differ at seed " + std::to_string(seed)}};
        }
    }
    return {{"serialization", true, "100 random graphs round-trip bit-identical"}};
}

// ---------------------------------------------------------------------------

struct Criterion {
    std::string name;
    double budget_s;
    std::function<std::vector<Result>()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {"jacobians", 10.0, run_jacobians},
        {"optimizer-oracle", 60.0, run_optimizer_oracle},
        {"zero-noise-e2e", 30.0, run_zero_noise},
        {"loose-gps-registration", 300.0, run_loose_gps},
        {"anchor-curve", 900.0, run_anchor_curve},  // also covers single-tile-vs-cross-tile
        {"ukf-gate-calibration", 60.0, run_gate_calibration},
        {"rigid-align-oracle", 30.0, run_rigid_oracle},
        {"drift-demonstration", 300.0, run_drift},
        {"serialization", 10.0, run_serialization},
    };

    std::vector<std::string> wanted(argv + 1, argv + argc);
    bool all_pass = true;
    for (const Criterion& c : criteria) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), c.name) == wanted.end())
            continue;
        const auto start = std::chrono::steady_clock::now();
        std::vector<Result> results;
        try {
            results = c.run();
        } catch (const std::exception& e) {
            results = {{c.name, false, std::string("exception: ") + e.what()}};
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = elapsed <= c.budget_s;
        for (Result& r : results) {
            r.pass = r.pass && in_budget;
            std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.details;
            if (!in_budget) std::cout << "; over budget " << c.budget_s << " s";
            std::cout << ")  [" << elapsed << " s]" << std::endl;
            all_pass = all_pass && r.pass;
        }
    }
    return all_pass ? 0 : 1;
}
