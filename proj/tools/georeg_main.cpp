// Command-line pipeline: simulate -> filter-gps -> align-rigid ->
// optimize --gps-priors -> optimize --anchors -> evaluate / project.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "georeg/csv.hpp"
#include "georeg/evaluation.hpp"
#include "georeg/graph_io.hpp"
#include "georeg/projection.hpp"
#include "georeg/rigid_align.hpp"
#include "georeg/simulator.hpp"
#include "georeg/ukf.hpp"
#include "georeg/util.hpp"

#ifndef GEOREG_VERSION
#define GEOREG_VERSION "dev"
#endif

namespace {

using nlohmann::json;
using namespace georeg;

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// One JSON line per invocation: args, input hashes, output hashes.
struct Manifest {
    std::string path;  // empty disables
    json record;

    Manifest(const std::string& manifest_path, const std::string& subcommand,
             const std::vector<std::string>& args) {
        path = manifest_path;
        record["tool"] = "georeg";
        record["version"] = GEOREG_VERSION;
        record["subcommand"] = subcommand;
        record["args"] = args;
        record["inputs"] = json::object();
        record["outputs"] = json::object();
    }

    void input(const std::string& file) {
        if (!path.empty()) record["inputs"][file] = hex64(hash_file(file));
    }
    void output(const std::string& file) {
        if (!path.empty()) record["outputs"][file] = hex64(hash_file(file));
    }
    void config(const json& snapshot) { record["config"] = snapshot; }

    void append() {
        if (path.empty()) return;
        std::ofstream out(path, std::ios::app);
        if (!out) throw Error("cannot open manifest: " + path);
        out << record.dump() << '\n';
    }
};

MapOrigin load_origin(const std::string& origin_file) {
    if (origin_file.empty()) return MapOrigin{};
    return read_origin_file(origin_file);
}

std::vector<Point2> parse_polygon(const std::string& spec) {
    std::vector<Point2> poly;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ';')) {
        const std::size_t comma = item.find(',');
        if (comma == std::string::npos)
            throw ConfigError("region-poly: expected x,y pairs separated by ';'");
        try {
            poly.emplace_back(std::stod(item.substr(0, comma)), std::stod(item.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ConfigError("region-poly: bad coordinate '" + item + "'");
        }
    }
    if (!poly.empty() && poly.size() < 3) throw ConfigError("region-poly: need at least 3 points");
    return poly;
}

std::vector<int> parse_int_list(const std::string& spec) {
    std::vector<int> values;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            values.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ConfigError("n: bad count '" + item + "'");
        }
    }
    if (values.empty()) throw ConfigError("n: empty list");
    return values;
}

// --------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string preset = "loop";
    std::string config_file;
    std::string out_dir = ".";
    CLI::App* cmd = nullptr;
};

void add_simulate(CLI::App& app, SimulateArgs& args, SimConfig& overrides) {
    CLI::App* cmd = app.add_subcommand("simulate", "Generate a synthetic world and sensor logs");
    args.cmd = cmd;
    cmd->add_option("--preset", args.preset, "Path preset: loop, figure8, campus");
    cmd->add_option("--config", args.config_file, "key=value config file (see README)");
    cmd->add_option("--out-dir", args.out_dir, "Output directory");
    cmd->add_option("--seed", overrides.seed, "Random seed (default 0)");
    cmd->add_option("--speed", overrides.speed, "Vehicle speed, m/s");
    cmd->add_option("--odom-rate", overrides.odom_rate_hz, "Odometry rate, Hz");
    cmd->add_option("--keyframe-spacing", overrides.keyframe_spacing, "Graph pose spacing, m");
    cmd->add_option("--pole-density", overrides.pole_density, "Poles per 100 m of path");
    cmd->add_option("--odom-sigma-v", overrides.odom_noise.sigma_v, "Forward twist noise, m/s");
    cmd->add_option("--odom-sigma-omega", overrides.odom_noise.sigma_omega, "Yaw twist noise, rad/s");
    cmd->add_option("--gps-rate", overrides.gps.rate_hz, "GPS rate, Hz");
    cmd->add_option("--gps-sigma", overrides.gps.sigma, "GPS white noise, m");
    cmd->add_option("--gps-bias-walk", overrides.gps.bias_walk_sigma, "GPS bias walk, m/sqrt(s)");
    cmd->add_option("--gps-outlier-rate", overrides.gps.outlier_rate, "Outlier probability");
    cmd->add_option("--gps-outlier-magnitude", overrides.gps.outlier_magnitude, "Outlier disc radius, m");
    cmd->add_option("--tile-size", overrides.aerial.tile_size, "Aerial tile size, m");
    cmd->add_option("--tile-bias-min", overrides.aerial.bias_min, "Min tile bias magnitude, m");
    cmd->add_option("--tile-bias-max", overrides.aerial.bias_max, "Max tile bias magnitude, m");
    cmd->add_option("--label-fraction", overrides.aerial.label_fraction, "Fraction of visible poles labeled");
    cmd->add_option("--obs-range", overrides.landmark_obs.max_range, "Landmark observation range, m");
    cmd->add_option("--obs-sigma", overrides.landmark_obs.sigma, "Landmark observation noise, m");
    cmd->add_flag("--loop-closures", "Add loop-closure constraints on revisits");
    cmd->add_option("--origin-easting", overrides.origin.easting_offset, "Map origin easting offset");
    cmd->add_option("--origin-northing", overrides.origin.northing_offset, "Map origin northing offset");
}

int run_simulate(const SimulateArgs& args, const SimConfig& overrides, Manifest& manifest) {
    SimConfig cfg = preset_config(args.preset);
    if (!args.config_file.empty()) {
        manifest.input(args.config_file);
        cfg = load_sim_config(args.config_file, cfg);
    }
    // command line beats config file beats preset
    CLI::App* cmd = args.cmd;
    auto given = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (given("--seed")) cfg.seed = overrides.seed;
    if (given("--speed")) cfg.speed = overrides.speed;
    if (given("--odom-rate")) cfg.odom_rate_hz = overrides.odom_rate_hz;
    if (given("--keyframe-spacing")) cfg.keyframe_spacing = overrides.keyframe_spacing;
    if (given("--pole-density")) cfg.pole_density = overrides.pole_density;
    if (given("--odom-sigma-v")) cfg.odom_noise.sigma_v = overrides.odom_noise.sigma_v;
    if (given("--odom-sigma-omega")) cfg.odom_noise.sigma_omega = overrides.odom_noise.sigma_omega;
    if (given("--gps-rate")) cfg.gps.rate_hz = overrides.gps.rate_hz;
    if (given("--gps-sigma")) cfg.gps.sigma = overrides.gps.sigma;
    if (given("--gps-bias-walk")) cfg.gps.bias_walk_sigma = overrides.gps.bias_walk_sigma;
    if (given("--gps-outlier-rate")) cfg.gps.outlier_rate = overrides.gps.outlier_rate;
    if (given("--gps-outlier-magnitude"))
        cfg.gps.outlier_magnitude = overrides.gps.outlier_magnitude;
    if (given("--tile-size")) cfg.aerial.tile_size = overrides.aerial.tile_size;
    if (given("--tile-bias-min")) cfg.aerial.bias_min = overrides.aerial.bias_min;
    if (given("--tile-bias-max")) cfg.aerial.bias_max = overrides.aerial.bias_max;
    if (given("--label-fraction")) cfg.aerial.label_fraction = overrides.aerial.label_fraction;
    if (given("--obs-range")) cfg.landmark_obs.max_range = overrides.landmark_obs.max_range;
    if (given("--obs-sigma")) cfg.landmark_obs.sigma = overrides.landmark_obs.sigma;
    if (given("--origin-easting")) cfg.origin.easting_offset = overrides.origin.easting_offset;
    if (given("--origin-northing")) cfg.origin.northing_offset = overrides.origin.northing_offset;
    if (given("--loop-closures")) cfg.loop_closure.enabled = true;

    const SimOutput out = generate(cfg);

    std::filesystem::create_directories(args.out_dir);
    const std::string dir = args.out_dir + "/";
    write_graph_file(out.initial_graph, dir + "graph.g2o");
    write_gps_csv(out.gps, dir + "gps.csv");
    write_odom_csv(out.odom, dir + "odom.csv");
    write_path_csv(out.world.truth_path, dir + "truth.csv");
    write_origin_file(cfg.origin, dir + "origin.txt");

    std::vector<std::pair<int, Point2>> labels_utm;
    for (const auto& [pid, label] : out.world.labels)
        labels_utm.emplace_back(pid, map_to_utm(label, cfg.origin));
    write_labels_csv(labels_utm, dir + "labels.csv");

    std::vector<std::pair<VertexId, double>> keyframes;
    for (std::size_t i = 0; i < out.world.truth_keyframes.size(); ++i)
        keyframes.emplace_back(static_cast<VertexId>(i), out.world.truth_keyframes[i].first);
    write_keyframes_csv(keyframes, dir + "keyframes.csv");

    json snapshot;
    snapshot["seed"] = cfg.seed;
    snapshot["preset"] = args.preset;
    snapshot["speed"] = cfg.speed;
    snapshot["odom_rate_hz"] = cfg.odom_rate_hz;
    snapshot["keyframe_spacing"] = cfg.keyframe_spacing;
    snapshot["pole_density"] = cfg.pole_density;
    snapshot["gps"] = {{"rate_hz", cfg.gps.rate_hz},
                       {"sigma", cfg.gps.sigma},
                       {"bias_walk_sigma", cfg.gps.bias_walk_sigma},
                       {"outlier_rate", cfg.gps.outlier_rate},
                       {"outlier_magnitude", cfg.gps.outlier_magnitude}};
    snapshot["aerial"] = {{"tile_size", cfg.aerial.tile_size},
                          {"bias_min", cfg.aerial.bias_min},
                          {"bias_max", cfg.aerial.bias_max},
                          {"label_fraction", cfg.aerial.label_fraction}};
    manifest.config(snapshot);
    for (const char* name :
         {"graph.g2o", "gps.csv", "odom.csv", "truth.csv", "labels.csv", "keyframes.csv",
          "origin.txt"})
        manifest.output(dir + name);

    std::cout << "simulate: " << out.initial_graph.poses().size() << " poses, "
              << out.initial_graph.landmarks().size() << " landmarks, " << out.gps.size()
              << " fixes, " << out.world.labels.size() << " labels -> " << args.out_dir
              << std::endl;
    return 0;
}

// --------------------------------------------------------------------------
// filter-gps

struct FilterArgs {
    std::string odom_file, gps_file, origin_file;
    std::string out_path = "path.csv";
    std::string decisions_path;
    double confidence = 0.95;
    double gps_sigma = 5.0;
    double sigma_v = 0.1, sigma_omega = 0.02;
    double alpha = 0.1, beta = 2.0, kappa = 0.0;
    double init_x = 0.0, init_y = 0.0, init_theta = 0.0;
    double init_sigma_xy = 10.0, init_sigma_theta = 1.0;
    bool init_from_gps = false;
};

void add_filter(CLI::App& app, FilterArgs& args) {
    CLI::App* cmd = app.add_subcommand("filter-gps", "Fuse odometry and GPS, gate outliers");
    cmd->add_option("--odom", args.odom_file, "Odometry CSV (t,v,omega)")->required();
    cmd->add_option("--gps", args.gps_file, "GPS CSV (t,easting,northing,sigma)")->required();
    cmd->add_option("--origin", args.origin_file, "Map origin file; GPS is converted to map frame");
    cmd->add_option("--out", args.out_path, "Output filtered path CSV");
    cmd->add_option("--decisions", args.decisions_path, "Output gate decisions CSV");
    cmd->add_option("--confidence", args.confidence, "Gate confidence (0, 1)");
    cmd->add_option("--gps-sigma", args.gps_sigma, "Fallback GPS sigma when a fix has none, m");
    cmd->add_option("--sigma-v", args.sigma_v, "Process noise, m/s");
    cmd->add_option("--sigma-omega", args.sigma_omega, "Process noise, rad/s");
    cmd->add_option("--alpha", args.alpha, "Unscented spread parameter");
    cmd->add_option("--beta", args.beta, "Unscented prior-knowledge parameter");
    cmd->add_option("--kappa", args.kappa, "Unscented secondary scaling");
    cmd->add_option("--init-x", args.init_x, "Initial x, map frame");
    cmd->add_option("--init-y", args.init_y, "Initial y, map frame");
    cmd->add_option("--init-theta", args.init_theta, "Initial heading, rad");
    cmd->add_option("--init-sigma-xy", args.init_sigma_xy, "Initial position sigma, m");
    cmd->add_option("--init-sigma-theta", args.init_sigma_theta, "Initial heading sigma, rad");
    cmd->add_flag("--init-from-gps", args.init_from_gps, "Start at the first GPS fix");
}

int run_filter(const FilterArgs& args, Manifest& manifest) {
    manifest.input(args.odom_file);
    manifest.input(args.gps_file);
    const MapOrigin origin = load_origin(args.origin_file);
    if (!args.origin_file.empty()) manifest.input(args.origin_file);

    const auto odom = read_odom_csv(args.odom_file);
    auto gps = read_gps_csv(args.gps_file);
    for (GpsFix& fix : gps) {
        const Point2 p = utm_to_map({fix.easting, fix.northing}, origin);
        fix.easting = p.x;
        fix.northing = p.y;
    }

    FilterState init;
    init.t = odom.empty() ? 0.0 : odom.front().t;
    init.mean << args.init_x, args.init_y, args.init_theta;
    if (args.init_from_gps && !gps.empty()) {
        init.mean(0) = gps.front().easting;
        init.mean(1) = gps.front().northing;
    }
    init.cov = Eigen::Matrix3d::Identity() * args.init_sigma_xy * args.init_sigma_xy;
    init.cov(2, 2) = args.init_sigma_theta * args.init_sigma_theta;

    FilterConfig cfg;
    cfg.ut = {args.alpha, args.beta, args.kappa};
    cfg.process = {args.sigma_v, args.sigma_omega};
    cfg.default_gps_sigma = args.gps_sigma;
    cfg.gate_confidence = args.confidence;

    const FilterRun run = run_filter(odom, gps, init, cfg);
    write_path_csv(run.path, args.out_path);
    manifest.output(args.out_path);

    long rejected = 0;
    if (!args.decisions_path.empty()) {
        std::vector<DecisionRow> rows;
        rows.reserve(run.decisions.size());
        for (const GateDecision& d : run.decisions) {
            const Point2 utm = map_to_utm({d.fix.easting, d.fix.northing}, origin);
            rows.push_back({d.fix.t, utm.x, utm.y, d.mahalanobis_sq, d.threshold, d.accepted});
            if (!d.accepted) ++rejected;
        }
        write_decisions_csv(rows, args.decisions_path);
        manifest.output(args.decisions_path);
    } else {
        for (const GateDecision& d : run.decisions)
            if (!d.accepted) ++rejected;
    }

    std::cout << "filter-gps: " << run.path.size() << " poses, " << run.decisions.size()
              << " fixes, " << rejected << " rejected -> " << args.out_path << std::endl;
    return 0;
}

// --------------------------------------------------------------------------
// align-rigid

struct AlignArgs {
    std::string graph_file, gps_file, times_file, origin_file, decisions_file;
    std::string out_graph = "aligned.g2o";
    std::string report_file;
    double max_dt = 0.5;
};

void add_align(CLI::App& app, AlignArgs& args) {
    CLI::App* cmd =
        app.add_subcommand("align-rigid", "Rigidly align a local graph to GPS positions");
    cmd->add_option("--graph", args.graph_file, "Input graph file")->required();
    cmd->add_option("--gps", args.gps_file, "GPS CSV (t,easting,northing,sigma)")->required();
    cmd->add_option("--times", args.times_file, "keyframes CSV (vertex_id,t)")->required();
    cmd->add_option("--origin", args.origin_file, "Map origin file");
    cmd->add_option("--decisions", args.decisions_file, "Gate decisions CSV; rejected fixes get weight 0");
    cmd->add_option("--max-dt", args.max_dt, "Max time distance for a correspondence, s");
    cmd->add_option("--out", args.out_graph, "Output transformed graph file");
    cmd->add_option("--report", args.report_file, "Write the JSON report to a file as well");
}

int run_align(const AlignArgs& args, Manifest& manifest) {
    manifest.input(args.graph_file);
    manifest.input(args.gps_file);
    manifest.input(args.times_file);
    PoseGraph graph = read_graph_file(args.graph_file);
    auto gps = read_gps_csv(args.gps_file);
    const MapOrigin origin = load_origin(args.origin_file);
    for (GpsFix& fix : gps) {
        const Point2 p = utm_to_map({fix.easting, fix.northing}, origin);
        fix.easting = p.x;
        fix.northing = p.y;
    }

    std::unordered_map<VertexId, double> time_of;
    for (const auto& [id, t] : read_keyframes_csv(args.times_file)) time_of[id] = t;
    std::vector<std::pair<double, Pose2>> local_path;
    for (const PoseVertex& v : graph.poses()) {
        const auto it = time_of.find(v.id);
        if (it != time_of.end()) local_path.emplace_back(it->second, v.estimate);
    }
    if (local_path.empty())
        throw StructureError("align-rigid: no pose vertex has a timestamp in " + args.times_file);

    std::optional<std::vector<bool>> accepted;
    if (!args.decisions_file.empty()) {
        manifest.input(args.decisions_file);
        const auto rows = read_decisions_csv(args.decisions_file);
        accepted.emplace(gps.size(), true);
        // match decisions to fixes by timestamp
        std::size_t j = 0;
        for (std::size_t i = 0; i < gps.size(); ++i) {
            while (j < rows.size() && rows[j].t < gps[i].t - 1e-9) ++j;
            if (j < rows.size() && std::abs(rows[j].t - gps[i].t) < 1e-9)
                (*accepted)[i] = rows[j].accepted;
        }
    }

    const CorrespondenceSet set =
        build_correspondences(local_path, gps, args.max_dt, accepted ? &*accepted : nullptr);
    const Pose2 T = fit_se2(set);
    apply_to_graph(T, graph);
    write_graph_file(graph, args.out_graph);
    manifest.output(args.out_graph);

    json report;
    report["theta"] = T.theta;
    report["tx"] = T.x;
    report["ty"] = T.y;
    report["chi2"] = alignment_chi2(T, set);
    report["pairs"] = set.pairs.size();
    std::cout << report.dump() << std::endl;
    if (!args.report_file.empty()) {
        write_file_atomic(args.report_file, report.dump() + "\n");
        manifest.output(args.report_file);
    }
    return 0;
}

// --------------------------------------------------------------------------
// optimize

struct OptimizeArgs {
    std::string graph_file;
    std::string out_graph = "optimized.g2o";
    std::string report_file;
    std::string gps_priors_path, times_file;
    std::string anchors_file, origin_file;
    double spacing = 10.0;
    double gps_sigma = 5.0;
    double max_dt = 0.5;
    double anchor_sigma = 0.1;
    double match_radius = 3.0;
    int max_iter = 100;
    double tol = 1e-9;
    double lambda = 1e-4;
};

void add_optimize(CLI::App& app, OptimizeArgs& args) {
    CLI::App* cmd = app.add_subcommand("optimize", "Optimize a graph, optionally adding priors");
    cmd->add_option("--graph", args.graph_file, "Input graph file")->required();
    cmd->add_option("--out", args.out_graph, "Output graph file");
    cmd->add_option("--report", args.report_file, "Write the JSON report to a file as well");
    cmd->add_option("--gps-priors", args.gps_priors_path,
                    "Filtered path CSV; adds loose position priors along the trajectory");
    cmd->add_option("--times", args.times_file, "keyframes CSV (vertex_id,t), required with --gps-priors");
    cmd->add_option("--spacing", args.spacing, "Meters of travel between GPS priors");
    cmd->add_option("--gps-sigma", args.gps_sigma, "GPS prior sigma, m");
    cmd->add_option("--max-dt", args.max_dt, "Max time distance when joining path to vertices, s");
    cmd->add_option("--anchors", args.anchors_file,
                    "Labels CSV (pole_id,easting,northing); adds tight landmark priors");
    cmd->add_option("--origin", args.origin_file, "Map origin file for label conversion");
    cmd->add_option("--anchor-sigma", args.anchor_sigma, "Anchor prior sigma, m");
    cmd->add_option("--match-radius", args.match_radius, "Label-landmark matching radius, m");
    cmd->add_option("--max-iter", args.max_iter, "Iteration cap");
    cmd->add_option("--tol", args.tol, "Relative chi2 decrease tolerance");
    cmd->add_option("--lambda", args.lambda, "Initial damping");
}

int run_optimize(const OptimizeArgs& args, Manifest& manifest) {
    manifest.input(args.graph_file);
    PoseGraph graph = read_graph_file(args.graph_file);
    const MapOrigin origin = load_origin(args.origin_file);

    int gps_edges = 0, anchor_edges = 0, matched = 0;
    if (!args.gps_priors_path.empty()) {
        if (args.times_file.empty())
            throw ConfigError("times: --gps-priors needs --times to join path and vertices");
        manifest.input(args.gps_priors_path);
        manifest.input(args.times_file);
        const auto path = read_path_csv(args.gps_priors_path);
        std::unordered_map<VertexId, double> time_of;
        for (const auto& [id, t] : read_keyframes_csv(args.times_file)) time_of[id] = t;

        std::vector<std::pair<VertexId, Point2>> joined;
        for (const PoseVertex& v : graph.poses()) {
            const auto it = time_of.find(v.id);
            if (it == time_of.end()) continue;
            // nearest filtered sample in time
            const double t = it->second;
            auto lower = std::lower_bound(path.begin(), path.end(), t,
                                          [](const auto& e, double tv) { return e.first < tv; });
            std::size_t best = lower == path.end() ? path.size() - 1
                                                   : static_cast<std::size_t>(lower - path.begin());
            if (best > 0 && std::abs(path[best - 1].first - t) <= std::abs(path[best].first - t))
                best -= 1;
            if (std::abs(path[best].first - t) > args.max_dt) continue;
            joined.emplace_back(v.id, path[best].second.translation());
        }
        // priors take over the gauge from any FIX flags
        graph.clear_fixed();
        gps_edges = attach_gps_priors(graph, joined, args.spacing, args.gps_sigma);
    }

    if (!args.anchors_file.empty()) {
        manifest.input(args.anchors_file);
        if (!args.origin_file.empty()) manifest.input(args.origin_file);
        std::vector<Point2> labels;
        for (const auto& [pid, utm] : read_labels_csv(args.anchors_file))
            labels.push_back(utm_to_map(utm, origin));
        const auto matches = match_labels(graph, labels, args.match_radius);
        matched = static_cast<int>(matches.size());
        std::vector<std::pair<VertexId, Point2>> anchors;
        for (const LabelMatch& m : matches) anchors.emplace_back(m.landmark, m.label);
        graph.clear_fixed();
        anchor_edges = attach_anchor_priors(graph, anchors, args.anchor_sigma);
    }

    OptimizeConfig cfg{args.max_iter, args.tol, args.lambda};
    const OptimizeReport report = optimize(graph, cfg);
    write_graph_file(graph, args.out_graph);
    manifest.output(args.out_graph);

    json j;
    j["iterations"] = report.iterations;
    j["initial_chi2"] = report.initial_chi2;
    j["final_chi2"] = report.final_chi2;
    j["converged"] = report.converged;
    j["termination"] = report.termination == Termination::tolerance ? "tolerance"
                       : report.termination == Termination::max_iter ? "max_iter"
                                                                     : "lm_stall";
    j["gps_priors_added"] = gps_edges;
    j["anchors_added"] = anchor_edges;
    j["labels_matched"] = matched;
    std::cout << j.dump() << std::endl;
    if (!args.report_file.empty()) {
        write_file_atomic(args.report_file, j.dump() + "\n");
        manifest.output(args.report_file);
    }
    return 0;
}

// --------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string graph_file, labels_file, origin_file;
    std::string n_list = "0";
    long max_combinations = 1000;
    std::uint64_t sample_seed = 0;
    double anchor_sigma = 0.1;
    double match_radius = 3.0;
    std::string region_poly;
    std::string out_curve = "curve.csv";
    std::string out_residuals = "residuals.csv";
    int max_iter = 100;
};

void add_evaluate(CLI::App& app, EvaluateArgs& args) {
    CLI::App* cmd =
        app.add_subcommand("evaluate", "Leave-out anchor accuracy curve over label subsets");
    cmd->add_option("--graph", args.graph_file, "Registered graph file")->required();
    cmd->add_option("--labels", args.labels_file, "Labels CSV (pole_id,easting,northing)")->required();
    cmd->add_option("--origin", args.origin_file, "Map origin file");
    cmd->add_option("--n", args.n_list, "Comma-separated anchor counts, e.g. 0,1,2,4");
    cmd->add_option("--max-combinations", args.max_combinations, "Cap per n; sampled above it");
    cmd->add_option("--seed", args.sample_seed, "Subset sampling seed");
    cmd->add_option("--anchor-sigma", args.anchor_sigma, "Anchor prior sigma, m");
    cmd->add_option("--match-radius", args.match_radius, "Label-landmark matching radius, m");
    cmd->add_option("--region-poly", args.region_poly, "Polygon filter x,y;x,y;... (map frame)");
    cmd->add_option("--out-curve", args.out_curve, "Curve CSV (n,combos,mean_err,stddev)");
    cmd->add_option("--out-residuals", args.out_residuals, "Per-landmark residual CSV");
    cmd->add_option("--max-iter", args.max_iter, "Optimizer iteration cap per combination");
}

int run_evaluate(const EvaluateArgs& args, Manifest& manifest) {
    // validate the configuration before touching any file
    EvalConfig cfg;
    cfg.n_values = parse_int_list(args.n_list);
    cfg.max_combinations = args.max_combinations;
    cfg.sample_seed = args.sample_seed;
    cfg.anchor_sigma = args.anchor_sigma;
    cfg.match_radius = args.match_radius;
    cfg.region_filter = parse_polygon(args.region_poly);
    cfg.opt.max_iter = args.max_iter;

    manifest.input(args.graph_file);
    manifest.input(args.labels_file);
    const PoseGraph graph = read_graph_file(args.graph_file);
    const MapOrigin origin = load_origin(args.origin_file);

    std::vector<Point2> labels;
    for (const auto& [pid, utm] : read_labels_csv(args.labels_file))
        labels.push_back(utm_to_map(utm, origin));
    const auto matches = match_labels(graph, labels, args.match_radius);
    const EvalReport report = evaluate_curve(graph, matches, cfg);

    std::ostringstream curve;
    curve << "n,combos,mean_err,stddev\n";
    long failures = 0;
    for (const EvalRow& row : report.rows) {
        curve << row.n << ',' << row.combinations_evaluated << ','
              << format_double(row.mean_holdout_error) << ',' << format_double(row.stddev) << '\n';
        failures += row.failed;
    }
    write_file_atomic(args.out_curve, curve.str());
    manifest.output(args.out_curve);

    std::ostringstream residuals;
    residuals << "landmark,label_easting,label_northing,easting,northing,error\n";
    for (const LandmarkResidual& r : report.final_residuals) {
        const Point2 label_utm = map_to_utm(r.label, origin);
        const Point2 est_utm = map_to_utm(r.estimate, origin);
        residuals << r.landmark << ',' << format_double(label_utm.x) << ','
                  << format_double(label_utm.y) << ',' << format_double(est_utm.x) << ','
                  << format_double(est_utm.y) << ',' << format_double(r.error) << '\n';
    }
    write_file_atomic(args.out_residuals, residuals.str());
    manifest.output(args.out_residuals);

    if (failures > 0)
        std::cerr << "georeg: warning: " << failures
                  << " combination(s) failed to optimize and were excluded" << std::endl;
    std::cout << "evaluate: " << matches.size() << " matched labels, " << report.rows.size()
              << " curve rows -> " << args.out_curve << std::endl;
    return 0;
}

// --------------------------------------------------------------------------
// project

struct ProjectArgs {
    std::string graph_file, scans_file, origin_file;
    std::string out_points = "points.csv";
    std::string grid_file, sidecar_file;
    double cell_size = 0.2;
};

void add_project(CLI::App& app, ProjectArgs& args) {
    CLI::App* cmd =
        app.add_subcommand("project", "Place per-pose scan points into the global frame");
    cmd->add_option("--graph", args.graph_file, "Optimized graph file")->required();
    cmd->add_option("--scans", args.scans_file, "Scans CSV (pose_id,x,y,intensity)")->required();
    cmd->add_option("--origin", args.origin_file, "Map origin file");
    cmd->add_option("--out-points", args.out_points, "Output points CSV");
    cmd->add_option("--grid", args.grid_file, "Optional PGM intensity grid output");
    cmd->add_option("--sidecar", args.sidecar_file, "Georeference sidecar for the grid");
    cmd->add_option("--cell-size", args.cell_size, "Grid cell size, m");
}

int run_project(const ProjectArgs& args, Manifest& manifest) {
    manifest.input(args.graph_file);
    manifest.input(args.scans_file);
    const PoseGraph graph = read_graph_file(args.graph_file);
    const MapOrigin origin = load_origin(args.origin_file);
    const auto scans = read_scans_csv(args.scans_file);

    const auto points = project_scans(graph, scans, origin);
    write_points_csv(points, args.out_points);
    manifest.output(args.out_points);

    if (!args.grid_file.empty()) {
        const RasterGrid grid = rasterize(points, args.cell_size);
        write_pgm(grid, args.grid_file);
        manifest.output(args.grid_file);
        const std::string sidecar =
            args.sidecar_file.empty() ? args.grid_file + ".georef" : args.sidecar_file;
        write_grid_sidecar(grid, sidecar);
        manifest.output(sidecar);
    }

    std::cout << "project: " << points.size() << " points -> " << args.out_points << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"georeg: global registration toolkit for locally consistent 2D landmark maps"};
    app.set_version_flag("--version", GEOREG_VERSION);
    app.require_subcommand(1);
    std::string manifest_path = "georeg_manifest.jsonl";
    app.add_option("--manifest", manifest_path,
                   "Pipeline manifest to append to (empty string disables)");

    SimulateArgs sim_args;
    SimConfig sim_overrides;
    add_simulate(app, sim_args, sim_overrides);
    FilterArgs filter_args;
    add_filter(app, filter_args);
    AlignArgs align_args;
    add_align(app, align_args);
    OptimizeArgs optimize_args;
    add_optimize(app, optimize_args);
    EvaluateArgs evaluate_args;
    add_evaluate(app, evaluate_args);
    ProjectArgs project_args;
    add_project(app, project_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "georeg: error: config: " << e.what() << std::endl;
        return 4;
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        Manifest manifest(manifest_path, sub, args);
        int rc = 1;
        if (sub == "simulate") rc = run_simulate(sim_args, sim_overrides, manifest);
        else if (sub == "filter-gps") rc = run_filter(filter_args, manifest);
        else if (sub == "align-rigid") rc = run_align(align_args, manifest);
        else if (sub == "optimize") rc = run_optimize(optimize_args, manifest);
        else if (sub == "evaluate") rc = run_evaluate(evaluate_args, manifest);
        else if (sub == "project") rc = run_project(project_args, manifest);
        if (rc == 0) manifest.append();
        return rc;
    } catch (const georeg::ParseError& e) {
        std::cerr << "georeg: error: parse: " << e.what() << std::endl;
        return 2;
    } catch (const georeg::StructureError& e) {
        std::cerr << "georeg: error: input: " << e.what() << std::endl;
        return 2;
    } catch (const georeg::NumericalError& e) {
        std::cerr << "georeg: error: numerical: " << e.what() << std::endl;
        return 3;
    } catch (const georeg::ConfigError& e) {
        std::cerr << "georeg: error: config: " << e.what() << std::endl;
        return 4;
    } catch (const georeg::Error& e) {
        std::cerr << "georeg: error: input: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "georeg: error: internal: " << e.what() << std::endl;
        return 3;
    }
}
