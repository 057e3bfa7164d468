#include "georeg/graph.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "georeg/graph_io.hpp"
#include "georeg/util.hpp"

namespace georeg {

namespace {

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw StructureError(std::string("non-finite ") + what);
}

std::string id_str(VertexId id) { return std::to_string(id); }

}  // namespace

void validate_info(const Eigen::Ref<const Eigen::MatrixXd>& info, const char* what) {
    if (!info.allFinite()) throw StructureError(std::string(what) + ": non-finite information matrix");
    const double scale = std::max(1.0, info.cwiseAbs().maxCoeff());
    if ((info - info.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw StructureError(std::string(what) + ": information matrix not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success)
        throw StructureError(std::string(what) + ": information matrix not positive definite");
}

void PoseGraph::check_new_id(VertexId id) const {
    if (pose_index_.count(id) || landmark_index_.count(id))
        throw StructureError("duplicate vertex id " + id_str(id));
}

void PoseGraph::add_pose(VertexId id, const Pose2& estimate, bool fixed) {
    check_new_id(id);
    check_finite(estimate.x, "pose estimate");
    check_finite(estimate.y, "pose estimate");
    check_finite(estimate.theta, "pose estimate");
    pose_index_[id] = poses_.size();
    poses_.push_back(PoseVertex{id, estimate, fixed});
}

void PoseGraph::add_landmark(VertexId id, const Point2& estimate, LandmarkKind kind) {
    check_new_id(id);
    check_finite(estimate.x, "landmark estimate");
    check_finite(estimate.y, "landmark estimate");
    landmark_index_[id] = landmarks_.size();
    landmarks_.push_back(LandmarkVertex{id, estimate, kind});
}

const PoseVertex& PoseGraph::pose(VertexId id) const {
    auto it = pose_index_.find(id);
    if (it == pose_index_.end()) throw StructureError("no pose vertex with id " + id_str(id));
    return poses_[it->second];
}

const LandmarkVertex& PoseGraph::landmark(VertexId id) const {
    auto it = landmark_index_.find(id);
    if (it == landmark_index_.end()) throw StructureError("no landmark vertex with id " + id_str(id));
    return landmarks_[it->second];
}

void PoseGraph::set_pose_estimate(VertexId id, const Pose2& p) {
    auto it = pose_index_.find(id);
    if (it == pose_index_.end()) throw StructureError("no pose vertex with id " + id_str(id));
    poses_[it->second].estimate = p;
}

void PoseGraph::set_landmark_estimate(VertexId id, const Point2& p) {
    auto it = landmark_index_.find(id);
    if (it == landmark_index_.end()) throw StructureError("no landmark vertex with id " + id_str(id));
    check_finite(p.x, "landmark estimate");
    check_finite(p.y, "landmark estimate");
    landmarks_[it->second].estimate = p;
}

void PoseGraph::set_fixed(VertexId id, bool fixed) {
    auto it = pose_index_.find(id);
    if (it == pose_index_.end()) throw StructureError("no pose vertex with id " + id_str(id));
    poses_[it->second].fixed = fixed;
}

void PoseGraph::clear_fixed() {
    for (auto& p : poses_) p.fixed = false;
}

void PoseGraph::add_edge(Edge edge) {
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, RelPoseEdge>) {
                pose(e.from);
                pose(e.to);
                validate_info(e.info, "EDGE_SE2");
            } else if constexpr (std::is_same_v<T, LandmarkObsEdge>) {
                pose(e.pose);
                landmark(e.landmark);
                validate_info(e.info, "EDGE_SE2_XY");
            } else if constexpr (std::is_same_v<T, GpsPriorEdge>) {
                pose(e.pose);
                validate_info(e.info, "EDGE_PRIOR_XY");
            } else {
                landmark(e.landmark);
                validate_info(e.info, "EDGE_ANCHOR_XY");
            }
        },
        edge);
    edges_.push_back(std::move(edge));
}

double PoseGraph::chi2() const {
    double total = 0.0;
    for (const Edge& e : edges_) total += edge_chi2(e, *this);
    return total;
}

std::uint64_t PoseGraph::content_hash() const {
    return fnv1a(graph_to_string(*this));
}

Eigen::VectorXd residual(const Edge& edge, const PoseGraph& graph) {
    return std::visit(
        [&](const auto& e) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, RelPoseEdge>) {
                const Pose2& xi = graph.pose(e.from).estimate;
                const Pose2& xj = graph.pose(e.to).estimate;
                const Pose2 err = compose(inverse(e.meas), compose(inverse(xi), xj));
                return Eigen::Vector3d(err.x, err.y, err.theta);
            } else if constexpr (std::is_same_v<T, LandmarkObsEdge>) {
                const Pose2& x = graph.pose(e.pose).estimate;
                const Point2& l = graph.landmark(e.landmark).estimate;
                const Point2 pred = inverse_transform_point(x, l);
                return Eigen::Vector2d(pred.x - e.meas.x, pred.y - e.meas.y);
            } else if constexpr (std::is_same_v<T, GpsPriorEdge>) {
                const Pose2& x = graph.pose(e.pose).estimate;
                return Eigen::Vector2d(x.x - e.meas.x, x.y - e.meas.y);
            } else {
                const Point2& l = graph.landmark(e.landmark).estimate;
                return Eigen::Vector2d(l.x - e.meas.x, l.y - e.meas.y);
            }
        },
        edge);
}

double edge_chi2(const Edge& edge, const PoseGraph& graph) {
    const Eigen::VectorXd r = residual(edge, graph);
    return std::visit(
        [&](const auto& e) -> double {
            return r.dot(e.info * r);
        },
        edge);
}

namespace {

inline Eigen::Matrix2d rot(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d R;
    R << c, -s, s, c;
    return R;
}

// d(R(theta)^T)/dtheta
inline Eigen::Matrix2d drot_t(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d D;
    D << -s, c, -c, -s;
    return D;
}

}  // namespace

std::vector<JacobianBlock> linearize(const Edge& edge, const PoseGraph& graph) {
    return std::visit(
        [&](const auto& e) -> std::vector<JacobianBlock> {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, RelPoseEdge>) {
                const Pose2& xi = graph.pose(e.from).estimate;
                const Pose2& xj = graph.pose(e.to).estimate;
                const Eigen::Matrix2d RmT = rot(e.meas.theta).transpose();
                const Eigen::Matrix2d RiT = rot(xi.theta).transpose();
                const Eigen::Vector2d delta(xj.x - xi.x, xj.y - xi.y);
                Eigen::Matrix3d Ji = Eigen::Matrix3d::Zero();
                Ji.block<2, 2>(0, 0) = -RmT * RiT;
                Ji.block<2, 1>(0, 2) = RmT * drot_t(xi.theta) * delta;
                Ji(2, 2) = -1.0;
                Eigen::Matrix3d Jj = Eigen::Matrix3d::Zero();
                Jj.block<2, 2>(0, 0) = RmT * RiT;
                Jj(2, 2) = 1.0;
                return {{e.from, Ji}, {e.to, Jj}};
            } else if constexpr (std::is_same_v<T, LandmarkObsEdge>) {
                const Pose2& x = graph.pose(e.pose).estimate;
                const Point2& l = graph.landmark(e.landmark).estimate;
                const Eigen::Matrix2d RT = rot(x.theta).transpose();
                const Eigen::Vector2d diff(l.x - x.x, l.y - x.y);
                Eigen::Matrix<double, 2, 3> Jp;
                Jp.block<2, 2>(0, 0) = -RT;
                Jp.block<2, 1>(0, 2) = drot_t(x.theta) * diff;
                return {{e.pose, Jp}, {e.landmark, Eigen::MatrixXd(RT)}};
            } else if constexpr (std::is_same_v<T, GpsPriorEdge>) {
                graph.pose(e.pose);
                Eigen::Matrix<double, 2, 3> J = Eigen::Matrix<double, 2, 3>::Zero();
                J.block<2, 2>(0, 0).setIdentity();
                return {{e.pose, J}};
            } else {
                graph.landmark(e.landmark);
                return {{e.landmark, Eigen::MatrixXd(Eigen::Matrix2d::Identity())}};
            }
        },
        edge);
}

int attach_gps_priors(PoseGraph& graph,
                      const std::vector<std::pair<VertexId, Point2>>& filtered_path,
                      double spacing_m, double sigma_m) {
    if (spacing_m <= 0.0) throw ConfigError("spacing: must be > 0");
    if (sigma_m <= 0.0) throw ConfigError("sigma: must be > 0");
    Info2 info = Info2::Identity() / (sigma_m * sigma_m);
    int added = 0;
    double arc = 0.0;
    double next_threshold = 0.0;
    for (std::size_t i = 0; i < filtered_path.size(); ++i) {
        if (i > 0) arc += (filtered_path[i].second - filtered_path[i - 1].second).norm();
        if (arc >= next_threshold) {
            graph.add_edge(GpsPriorEdge{filtered_path[i].first, filtered_path[i].second, info});
            ++added;
            next_threshold = (std::floor(arc / spacing_m) + 1.0) * spacing_m;
        }
    }
    return added;
}

int attach_anchor_priors(PoseGraph& graph,
                         const std::vector<std::pair<VertexId, Point2>>& labels,
                         double sigma_m) {
    if (sigma_m <= 0.0) throw ConfigError("sigma: must be > 0");
    Info2 info = Info2::Identity() / (sigma_m * sigma_m);
    int added = 0;
    for (const auto& [id, label] : labels) {
        graph.add_edge(AnchorPriorEdge{id, label, info});
        ++added;
    }
    return added;
}

}  // namespace georeg
