#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "georeg/errors.hpp"
#include "georeg/se2.hpp"

namespace georeg {

using VertexId = std::int64_t;

enum class LandmarkKind { pole, building_corner, other };

struct PoseVertex {
    VertexId id = 0;
    Pose2 estimate;
    bool fixed = false;
};

struct LandmarkVertex {
    VertexId id = 0;
    Point2 estimate;
    LandmarkKind kind = LandmarkKind::pole;
};

// Information matrices are validated (symmetric, positive definite) when an
// edge enters a graph, see validate_info().
using Info2 = Eigen::Matrix2d;
using Info3 = Eigen::Matrix3d;

// Odometry / loop-closure constraint between two poses.
struct RelPoseEdge {
    VertexId from = 0;
    VertexId to = 0;
    Pose2 meas;      // expected inverse(from) * to
    Info3 info = Info3::Identity();
};

// Sensor-frame observation of a landmark from a pose.
struct LandmarkObsEdge {
    VertexId pose = 0;
    VertexId landmark = 0;
    Point2 meas;     // landmark in the observing pose's frame
    Info2 info = Info2::Identity();
};

// Loose unary prior tying a pose's translation to a map-frame position.
struct GpsPriorEdge {
    VertexId pose = 0;
    Point2 meas;     // map frame
    Info2 info = Info2::Identity();
};

// Tight unary prior tying a landmark to a map-frame position.
struct AnchorPriorEdge {
    VertexId landmark = 0;
    Point2 meas;     // map frame
    Info2 info = Info2::Identity();
};

using Edge = std::variant<RelPoseEdge, LandmarkObsEdge, GpsPriorEdge, AnchorPriorEdge>;

void validate_info(const Eigen::Ref<const Eigen::MatrixXd>& info, const char* what);

// Vertices keep insertion order; edges keep insertion order. Both orders are
// preserved by serialization, so write/read round trips are bit-identical.
class PoseGraph {
public:
    void add_pose(VertexId id, const Pose2& estimate, bool fixed = false);
    void add_landmark(VertexId id, const Point2& estimate, LandmarkKind kind = LandmarkKind::pole);
    void add_edge(Edge edge);

    bool has_pose(VertexId id) const { return pose_index_.count(id) > 0; }
    bool has_landmark(VertexId id) const { return landmark_index_.count(id) > 0; }

    const PoseVertex& pose(VertexId id) const;
    const LandmarkVertex& landmark(VertexId id) const;

    void set_pose_estimate(VertexId id, const Pose2& p);
    void set_landmark_estimate(VertexId id, const Point2& p);
    void set_fixed(VertexId id, bool fixed);
    // Releases every FIX flag; used when global priors take over the gauge.
    void clear_fixed();

    const std::vector<PoseVertex>& poses() const { return poses_; }
    const std::vector<LandmarkVertex>& landmarks() const { return landmarks_; }
    const std::vector<Edge>& edges() const { return edges_; }

    double chi2() const;
    std::uint64_t content_hash() const;

private:
    void check_new_id(VertexId id) const;

    std::vector<PoseVertex> poses_;
    std::vector<LandmarkVertex> landmarks_;
    std::vector<Edge> edges_;
    std::unordered_map<VertexId, std::size_t> pose_index_;
    std::unordered_map<VertexId, std::size_t> landmark_index_;
};

// Residual of one edge at the graph's current estimates. 3 components for
// RelPose (dx, dy, dtheta with dtheta wrapped), 2 for the point-valued edges.
Eigen::VectorXd residual(const Edge& edge, const PoseGraph& graph);

double edge_chi2(const Edge& edge, const PoseGraph& graph);

struct JacobianBlock {
    VertexId vertex;
    Eigen::MatrixXd jac;  // residual_dim x (3 for poses, 2 for landmarks)
};

// Analytic Jacobians of the edge residual w.r.t. each incident vertex.
std::vector<JacobianBlock> linearize(const Edge& edge, const PoseGraph& graph);

struct OptimizeConfig {
    int max_iter = 100;
    double chi2_rel_tol = 1e-9;
    double lm_initial_lambda = 1e-4;
};

enum class Termination { tolerance, max_iter, lm_stall };

struct OptimizeReport {
    int iterations = 0;
    double initial_chi2 = 0.0;
    double final_chi2 = 0.0;
    bool converged = false;
    Termination termination = Termination::max_iter;
};

// Levenberg-Marquardt over (x, y, theta) with post-step angle wrapping and a
// sparse Cholesky solve of the damped normal equations. Estimates are updated
// in place. Throws StructureError if the gauge is unobservable (no fixed
// vertex and no prior edge reachable from some vertex) and NumericalError if
// the damped system stays indefinite.
OptimizeReport optimize(PoseGraph& graph, const OptimizeConfig& config = {});

// Adds one GpsPriorEdge at the first path vertex at or after every
// accumulated-arc-length multiple of `spacing_m`. Arc length is measured on
// the supplied filtered positions, which also serve as the prior measurements.
// info = diag(1/sigma^2, 1/sigma^2). Returns the number of edges added.
int attach_gps_priors(PoseGraph& graph,
                      const std::vector<std::pair<VertexId, Point2>>& filtered_path,
                      double spacing_m, double sigma_m);

// Adds one AnchorPriorEdge per (landmark, map-frame label) pair with
// info = diag(1/sigma^2, 1/sigma^2). Returns the number of edges added.
int attach_anchor_priors(PoseGraph& graph,
                         const std::vector<std::pair<VertexId, Point2>>& labels,
                         double sigma_m);

}  // namespace georeg
