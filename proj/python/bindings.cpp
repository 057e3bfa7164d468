#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "georeg/csv.hpp"
#include "georeg/evaluation.hpp"
#include "georeg/graph_io.hpp"
#include "georeg/projection.hpp"
#include "georeg/rigid_align.hpp"
#include "georeg/simulator.hpp"
#include "georeg/ukf.hpp"

namespace py = pybind11;
using namespace georeg;

namespace {

Info2 info2_from(double i11, double i12, double i22) {
    Info2 m;
    m << i11, i12, i12, i22;
    return m;
}

Info3 diag_info3(double ixy, double itheta) {
    Info3 m = Info3::Zero();
    m(0, 0) = m(1, 1) = ixy;
    m(2, 2) = itheta;
    return m;
}

py::dict report_to_dict(const OptimizeReport& r) {
    py::dict d;
    d["iterations"] = r.iterations;
    d["initial_chi2"] = r.initial_chi2;
    d["final_chi2"] = r.final_chi2;
    d["converged"] = r.converged;
    d["termination"] = r.termination == Termination::tolerance ? "tolerance"
                       : r.termination == Termination::max_iter ? "max_iter"
                                                                : "lm_stall";
    return d;
}

}  // namespace

PYBIND11_MODULE(_georeg, m) {
    m.doc() = "Global registration toolkit for locally consistent 2D landmark maps";

    py::register_exception<ParseError>(m, "GraphParseError", PyExc_ValueError);
    py::register_exception<StructureError>(m, "GraphStructureError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "SolverNumericalError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "BadConfigError", PyExc_ValueError);

    m.def("normalize_angle", &normalize_angle, py::arg("theta"),
          "Wrap an angle into (-pi, pi]");
    m.def("chi_square_quantile", &chi_square_quantile, py::arg("dof"), py::arg("p"));

    py::class_<Point2>(m, "Point2")
        .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
        .def_readwrite("x", &Point2::x)
        .def_readwrite("y", &Point2::y)
        .def("norm", &Point2::norm)
        .def("__repr__", [](const Point2& p) {
            std::ostringstream ss;
            ss << "Point2(" << p.x << ", " << p.y << ")";
            return ss.str();
        });

    py::class_<Pose2>(m, "Pose2")
        .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0,
             py::arg("theta") = 0.0)
        .def_readonly("x", &Pose2::x)
        .def_readonly("y", &Pose2::y)
        .def_readonly("theta", &Pose2::theta)
        .def("compose", [](const Pose2& a, const Pose2& b) { return compose(a, b); })
        .def("inverse", [](const Pose2& p) { return inverse(p); })
        .def("transform",
             [](const Pose2& p, const Point2& q) { return transform_point(p, q); })
        .def("__repr__", [](const Pose2& p) {
            std::ostringstream ss;
            ss << "Pose2(" << p.x << ", " << p.y << ", " << p.theta << ")";
            return ss.str();
        });

    py::class_<MapOrigin>(m, "MapOrigin")
        .def(py::init<double, double, std::string>(), py::arg("easting_offset") = 0.0,
             py::arg("northing_offset") = 0.0, py::arg("zone_label") = "")
        .def_readwrite("easting_offset", &MapOrigin::easting_offset)
        .def_readwrite("northing_offset", &MapOrigin::northing_offset)
        .def_readwrite("zone_label", &MapOrigin::zone_label);
    m.def("map_to_utm", &map_to_utm, py::arg("point"), py::arg("origin"));
    m.def("utm_to_map", &utm_to_map, py::arg("point"), py::arg("origin"));

    py::enum_<LandmarkKind>(m, "LandmarkKind")
        .value("pole", LandmarkKind::pole)
        .value("building_corner", LandmarkKind::building_corner)
        .value("other", LandmarkKind::other);

    py::class_<PoseGraph>(m, "PoseGraph")
        .def(py::init<>())
        .def("add_pose", &PoseGraph::add_pose, py::arg("id"), py::arg("estimate"),
             py::arg("fixed") = false)
        .def("add_landmark", &PoseGraph::add_landmark, py::arg("id"), py::arg("estimate"),
             py::arg("kind") = LandmarkKind::pole)
        .def("add_rel_pose_edge",
             [](PoseGraph& g, VertexId from, VertexId to, const Pose2& meas, double info_xy,
                double info_theta) {
                 g.add_edge(RelPoseEdge{from, to, meas, diag_info3(info_xy, info_theta)});
             },
             py::arg("from_id"), py::arg("to_id"), py::arg("meas"), py::arg("info_xy") = 1.0,
             py::arg("info_theta") = 1.0)
        .def("add_landmark_obs_edge",
             [](PoseGraph& g, VertexId pose, VertexId landmark, const Point2& meas, double info) {
                 g.add_edge(LandmarkObsEdge{pose, landmark, meas, info2_from(info, 0.0, info)});
             },
             py::arg("pose_id"), py::arg("landmark_id"), py::arg("meas"), py::arg("info") = 1.0)
        .def("add_gps_prior",
             [](PoseGraph& g, VertexId pose, const Point2& meas, double sigma) {
                 const double info = 1.0 / (sigma * sigma);
                 g.add_edge(GpsPriorEdge{pose, meas, info2_from(info, 0.0, info)});
             },
             py::arg("pose_id"), py::arg("meas"), py::arg("sigma") = 5.0)
        .def("add_anchor_prior",
             [](PoseGraph& g, VertexId landmark, const Point2& meas, double sigma) {
                 const double info = 1.0 / (sigma * sigma);
                 g.add_edge(AnchorPriorEdge{landmark, meas, info2_from(info, 0.0, info)});
             },
             py::arg("landmark_id"), py::arg("meas"), py::arg("sigma") = 0.1)
        .def("set_fixed", &PoseGraph::set_fixed, py::arg("id"), py::arg("fixed"))
        .def("clear_fixed", &PoseGraph::clear_fixed)
        .def("has_pose", &PoseGraph::has_pose)
        .def("has_landmark", &PoseGraph::has_landmark)
        .def("pose", [](const PoseGraph& g, VertexId id) { return g.pose(id).estimate; },
             py::arg("id"))
        .def("landmark",
             [](const PoseGraph& g, VertexId id) { return g.landmark(id).estimate; },
             py::arg("id"))
        .def("pose_ids",
             [](const PoseGraph& g) {
                 std::vector<VertexId> ids;
                 for (const auto& v : g.poses()) ids.push_back(v.id);
                 return ids;
             })
        .def("landmark_ids",
             [](const PoseGraph& g) {
                 std::vector<VertexId> ids;
                 for (const auto& v : g.landmarks()) ids.push_back(v.id);
                 return ids;
             })
        .def("num_edges", [](const PoseGraph& g) { return g.edges().size(); })
        .def("chi2", &PoseGraph::chi2)
        .def("content_hash", &PoseGraph::content_hash)
        .def("optimize",
             [](PoseGraph& g, int max_iter, double tol, double lm_lambda) {
                 return report_to_dict(optimize(g, OptimizeConfig{max_iter, tol, lm_lambda}));
             },
             py::arg("max_iter") = 100, py::arg("tol") = 1e-9, py::arg("lm_lambda") = 1e-4)
        .def("attach_gps_priors",
             [](PoseGraph& g, const std::vector<std::pair<VertexId, std::pair<double, double>>>& path,
                double spacing, double sigma) {
                 std::vector<std::pair<VertexId, Point2>> converted;
                 for (const auto& [id, xy] : path)
                     converted.emplace_back(id, Point2(xy.first, xy.second));
                 return attach_gps_priors(g, converted, spacing, sigma);
             },
             py::arg("path"), py::arg("spacing") = 10.0, py::arg("sigma") = 5.0)
        .def("attach_anchor_priors",
             [](PoseGraph& g, const std::vector<std::pair<VertexId, std::pair<double, double>>>& labels,
                double sigma) {
                 std::vector<std::pair<VertexId, Point2>> converted;
                 for (const auto& [id, xy] : labels)
                     converted.emplace_back(id, Point2(xy.first, xy.second));
                 return attach_anchor_priors(g, converted, sigma);
             },
             py::arg("labels"), py::arg("sigma") = 0.1)
        .def("save", &write_graph_file, py::arg("path"))
        .def_static("load", &read_graph_file, py::arg("path"))
        .def("to_string", [](const PoseGraph& g) { return graph_to_string(g); });

    // --- alignment ---------------------------------------------------------

    m.def("fit_se2",
          [](const std::vector<std::tuple<double, double, double, double, double>>& pairs) {
              CorrespondenceSet set;
              for (const auto& [lx, ly, gx, gy, w] : pairs)
                  set.pairs.push_back({{lx, ly}, {gx, gy}, w});
              return fit_se2(set);
          },
          py::arg("pairs"),
          "Weighted closed-form SE2 fit from (local_x, local_y, global_x, global_y, weight)");
    m.def("apply_to_graph", &apply_to_graph, py::arg("transform"), py::arg("graph"));

    // --- filtering ---------------------------------------------------------

    py::class_<GpsFix>(m, "GpsFix")
        .def(py::init([](double t, double easting, double northing, double sigma) {
                 return GpsFix{t, easting, northing, sigma, false};
             }),
             py::arg("t"), py::arg("easting"), py::arg("northing"), py::arg("sigma") = 5.0)
        .def_readwrite("t", &GpsFix::t)
        .def_readwrite("easting", &GpsFix::easting)
        .def_readwrite("northing", &GpsFix::northing)
        .def_readwrite("nominal_sigma", &GpsFix::nominal_sigma)
        .def_readonly("sim_outlier", &GpsFix::sim_outlier);

    py::class_<OdomSample>(m, "OdomSample")
        .def(py::init([](double t, double v, double omega) {
                 return OdomSample{t, v, omega};
             }),
             py::arg("t"), py::arg("v"), py::arg("omega"))
        .def_readwrite("t", &OdomSample::t)
        .def_readwrite("v", &OdomSample::v)
        .def_readwrite("omega", &OdomSample::omega);

    m.def("run_filter",
          [](const std::vector<OdomSample>& odom, const std::vector<GpsFix>& gps, double init_x,
             double init_y, double init_theta, double init_sigma_xy, double init_sigma_theta,
             double sigma_v, double sigma_omega, double gps_sigma, double confidence) {
              FilterState init;
              init.t = odom.empty() ? 0.0 : odom.front().t;
              init.mean << init_x, init_y, init_theta;
              init.cov = Eigen::Matrix3d::Identity() * init_sigma_xy * init_sigma_xy;
              init.cov(2, 2) = init_sigma_theta * init_sigma_theta;
              FilterConfig cfg;
              cfg.process = {sigma_v, sigma_omega};
              cfg.default_gps_sigma = gps_sigma;
              cfg.gate_confidence = confidence;
              const FilterRun run = run_filter(odom, gps, init, cfg);
              std::vector<std::tuple<double, double, double, double>> path;
              for (const auto& [t, p] : run.path) path.emplace_back(t, p.x, p.y, p.theta);
              std::vector<std::tuple<double, double, double, bool>> decisions;
              for (const auto& d : run.decisions)
                  decisions.emplace_back(d.fix.t, d.mahalanobis_sq, d.threshold, d.accepted);
              return py::make_tuple(path, decisions);
          },
          py::arg("odom"), py::arg("gps"), py::arg("init_x") = 0.0, py::arg("init_y") = 0.0,
          py::arg("init_theta") = 0.0, py::arg("init_sigma_xy") = 10.0,
          py::arg("init_sigma_theta") = 1.0, py::arg("sigma_v") = 0.1,
          py::arg("sigma_omega") = 0.02, py::arg("gps_sigma") = 5.0,
          py::arg("confidence") = 0.95,
          "Returns (path [(t,x,y,theta)], decisions [(t,d2,threshold,accepted)])");

    // --- simulation --------------------------------------------------------

    py::class_<SimOutput>(m, "SimOutput")
        .def_readonly("odom", &SimOutput::odom)
        .def_readonly("gps", &SimOutput::gps)
        .def_property_readonly("graph", [](const SimOutput& o) { return o.initial_graph; })
        .def_property_readonly("truth_keyframes",
                               [](const SimOutput& o) {
                                   std::vector<std::tuple<double, double, double, double>> rows;
                                   for (const auto& [t, p] : o.world.truth_keyframes)
                                       rows.emplace_back(t, p.x, p.y, p.theta);
                                   return rows;
                               })
        .def_property_readonly("poles",
                               [](const SimOutput& o) {
                                   std::vector<std::tuple<int, double, double>> rows;
                                   for (const auto& [pid, p] : o.world.poles)
                                       rows.emplace_back(pid, p.x, p.y);
                                   return rows;
                               })
        .def_property_readonly("labels", [](const SimOutput& o) {
            std::vector<std::tuple<int, double, double>> rows;
            for (const auto& [pid, p] : o.world.labels) rows.emplace_back(pid, p.x, p.y);
            return rows;
        });

    m.def("simulate",
          [](const std::string& preset, std::uint64_t seed, double gps_sigma, double pole_density,
             double label_fraction, double odom_sigma_v, double odom_sigma_omega,
             double tile_bias_min, double tile_bias_max) {
              SimConfig cfg = preset_config(preset);
              cfg.seed = seed;
              cfg.gps.sigma = gps_sigma;
              cfg.pole_density = pole_density;
              cfg.aerial.label_fraction = label_fraction;
              cfg.odom_noise = {odom_sigma_v, odom_sigma_omega};
              cfg.aerial.bias_min = tile_bias_min;
              cfg.aerial.bias_max = tile_bias_max;
              return generate(cfg);
          },
          py::arg("preset") = "loop", py::arg("seed") = 0, py::arg("gps_sigma") = 5.0,
          py::arg("pole_density") = 3.0, py::arg("label_fraction") = 0.8,
          py::arg("odom_sigma_v") = 0.02, py::arg("odom_sigma_omega") = 0.004,
          py::arg("tile_bias_min") = 0.28, py::arg("tile_bias_max") = 0.75);

    m.def("load_sim_config_and_generate",
          [](const std::string& path) { return generate(load_sim_config(path)); },
          py::arg("config_path"));

    // --- evaluation --------------------------------------------------------

    m.def("match_labels",
          [](const PoseGraph& g, const std::vector<std::pair<double, double>>& labels,
             double radius) {
              std::vector<Point2> pts;
              for (const auto& [x, y] : labels) pts.emplace_back(x, y);
              std::vector<std::pair<VertexId, std::pair<double, double>>> out;
              for (const LabelMatch& match : match_labels(g, pts, radius))
                  out.emplace_back(match.landmark, std::make_pair(match.label.x, match.label.y));
              return out;
          },
          py::arg("graph"), py::arg("labels"), py::arg("radius") = 3.0);

    m.def("evaluate_curve",
          [](const PoseGraph& g,
             const std::vector<std::pair<VertexId, std::pair<double, double>>>& matched,
             const std::vector<int>& n_values, long max_combinations, std::uint64_t sample_seed,
             double anchor_sigma) {
              std::vector<LabelMatch> matches;
              for (const auto& [id, xy] : matched)
                  matches.push_back({id, Point2(xy.first, xy.second)});
              EvalConfig cfg;
              cfg.n_values = n_values;
              cfg.max_combinations = max_combinations;
              cfg.sample_seed = sample_seed;
              cfg.anchor_sigma = anchor_sigma;
              const EvalReport report = evaluate_curve(g, matches, cfg);
              py::list rows;
              for (const EvalRow& row : report.rows) {
                  py::dict d;
                  d["n"] = row.n;
                  d["combos"] = row.combinations_evaluated;
                  d["mean_err"] = row.mean_holdout_error;
                  d["stddev"] = row.stddev;
                  d["failed"] = row.failed;
                  rows.append(d);
              }
              return rows;
          },
          py::arg("graph"), py::arg("matched"), py::arg("n_values"),
          py::arg("max_combinations") = 1000, py::arg("sample_seed") = 0,
          py::arg("anchor_sigma") = 0.1);

    // --- projection --------------------------------------------------------

    m.def("project_scans",
          [](const PoseGraph& g,
             const std::vector<std::pair<VertexId, std::vector<std::tuple<double, double, double>>>>&
                 scans,
             const MapOrigin& origin) {
              std::vector<ScanFrame> frames;
              for (const auto& [id, pts] : scans) {
                  ScanFrame frame{id, {}};
                  for (const auto& [x, y, intensity] : pts) frame.points.push_back({x, y, intensity});
                  frames.push_back(std::move(frame));
              }
              std::vector<std::tuple<double, double, double>> out;
              for (const GlobalPoint& p : project_scans(g, frames, origin))
                  out.emplace_back(p.easting, p.northing, p.intensity);
              return out;
          },
          py::arg("graph"), py::arg("scans"), py::arg("origin") = MapOrigin{});

#ifdef GEOREG_VERSION
    m.attr("__version__") = GEOREG_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
