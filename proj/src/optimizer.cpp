#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "georeg/graph.hpp"

namespace georeg {

namespace {

// Union-find over vertex indices for the gauge observability check.
class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

struct Indexer {
    // Column offset of each free vertex in the stacked parameter vector;
    // -1 for fixed poses. Poses take 3 columns, landmarks 2.
    std::unordered_map<VertexId, int> offset;
    std::unordered_map<VertexId, bool> is_pose;
    int dim = 0;
};

Indexer build_indexer(const PoseGraph& graph) {
    Indexer idx;
    for (const PoseVertex& v : graph.poses()) {
        idx.is_pose[v.id] = true;
        if (v.fixed) {
            idx.offset[v.id] = -1;
        } else {
            idx.offset[v.id] = idx.dim;
            idx.dim += 3;
        }
    }
    for (const LandmarkVertex& v : graph.landmarks()) {
        idx.is_pose[v.id] = false;
        idx.offset[v.id] = idx.dim;
        idx.dim += 2;
    }
    return idx;
}

void check_gauge(const PoseGraph& graph) {
    const std::size_t n_pose = graph.poses().size();
    const std::size_t n_lm = graph.landmarks().size();
    const std::size_t n = n_pose + n_lm;
    if (n == 0) throw StructureError("graph has no vertices");

    std::unordered_map<VertexId, std::size_t> slot;
    slot.reserve(n);
    for (std::size_t i = 0; i < n_pose; ++i) slot[graph.poses()[i].id] = i;
    for (std::size_t i = 0; i < n_lm; ++i) slot[graph.landmarks()[i].id] = n_pose + i;

    DisjointSet ds(n);
    std::vector<bool> constrained(n, false);
    for (std::size_t i = 0; i < n_pose; ++i)
        if (graph.poses()[i].fixed) constrained[i] = true;
    for (const Edge& edge : graph.edges()) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, RelPoseEdge>) {
                    ds.unite(slot.at(e.from), slot.at(e.to));
                } else if constexpr (std::is_same_v<T, LandmarkObsEdge>) {
                    ds.unite(slot.at(e.pose), slot.at(e.landmark));
                } else if constexpr (std::is_same_v<T, GpsPriorEdge>) {
                    constrained[slot.at(e.pose)] = true;
                } else {
                    constrained[slot.at(e.landmark)] = true;
                }
            },
            edge);
    }
    std::unordered_map<std::size_t, bool> root_ok;
    for (std::size_t i = 0; i < n; ++i)
        if (constrained[i]) root_ok[ds.find(i)] = true;
    if (root_ok.empty())
        throw StructureError(
            "underconstrained gauge: graph has no fixed vertex and no prior edge");
    for (std::size_t i = 0; i < n; ++i) {
        if (!root_ok.count(ds.find(i))) {
            const VertexId id = i < n_pose ? graph.poses()[i].id : graph.landmarks()[i - n_pose].id;
            throw StructureError("underconstrained gauge: vertex " + std::to_string(id) +
                                 " is not connected to any fixed vertex or prior edge");
        }
    }
}

struct Snapshot {
    std::vector<Pose2> poses;
    std::vector<Point2> landmarks;
};

Snapshot take_snapshot(const PoseGraph& graph) {
    Snapshot s;
    s.poses.reserve(graph.poses().size());
    for (const auto& v : graph.poses()) s.poses.push_back(v.estimate);
    s.landmarks.reserve(graph.landmarks().size());
    for (const auto& v : graph.landmarks()) s.landmarks.push_back(v.estimate);
    return s;
}

void restore_snapshot(PoseGraph& graph, const Snapshot& s) {
    for (std::size_t i = 0; i < s.poses.size(); ++i)
        graph.set_pose_estimate(graph.poses()[i].id, s.poses[i]);
    for (std::size_t i = 0; i < s.landmarks.size(); ++i)
        graph.set_landmark_estimate(graph.landmarks()[i].id, s.landmarks[i]);
}

void apply_step(PoseGraph& graph, const Indexer& idx, const Eigen::VectorXd& delta) {
    for (const PoseVertex& v : graph.poses()) {
        const int off = idx.offset.at(v.id);
        if (off < 0) continue;
        graph.set_pose_estimate(v.id, Pose2(v.estimate.x + delta(off),
                                            v.estimate.y + delta(off + 1),
                                            v.estimate.theta + delta(off + 2)));
    }
    for (const LandmarkVertex& v : graph.landmarks()) {
        const int off = idx.offset.at(v.id);
        graph.set_landmark_estimate(
            v.id, Point2(v.estimate.x + delta(off), v.estimate.y + delta(off + 1)));
    }
}

// Accumulates J^T I J and -J^T I r over all edges. Edge order fixes the
// accumulation order, so results are deterministic.
void build_normal_equations(const PoseGraph& graph, const Indexer& idx,
                            std::vector<Eigen::Triplet<double>>& triplets, Eigen::VectorXd& b) {
    triplets.clear();
    b.setZero();
    for (const Edge& edge : graph.edges()) {
        const Eigen::VectorXd r = residual(edge, graph);
        const auto blocks = linearize(edge, graph);
        const Eigen::MatrixXd info = std::visit(
            [](const auto& e) -> Eigen::MatrixXd { return e.info; }, edge);
        const Eigen::VectorXd weighted_r = info * r;
        for (std::size_t a = 0; a < blocks.size(); ++a) {
            const int off_a = idx.offset.at(blocks[a].vertex);
            if (off_a < 0) continue;
            const Eigen::MatrixXd JtI = blocks[a].jac.transpose() * info;
            b.segment(off_a, blocks[a].jac.cols()) -= blocks[a].jac.transpose() * weighted_r;
            for (std::size_t c = 0; c < blocks.size(); ++c) {
                const int off_c = idx.offset.at(blocks[c].vertex);
                if (off_c < 0) continue;
                const Eigen::MatrixXd H = JtI * blocks[c].jac;
                for (int i = 0; i < H.rows(); ++i)
                    for (int j = 0; j < H.cols(); ++j)
                        triplets.emplace_back(off_a + i, off_c + j, H(i, j));
            }
        }
    }
}

}  // namespace

OptimizeReport optimize(PoseGraph& graph, const OptimizeConfig& config) {
    check_gauge(graph);

    const Indexer idx = build_indexer(graph);
    OptimizeReport report;
    report.initial_chi2 = graph.chi2();
    report.final_chi2 = report.initial_chi2;
    if (idx.dim == 0) {  // everything fixed
        report.converged = true;
        report.termination = Termination::tolerance;
        return report;
    }

    constexpr double kLambdaMax = 1e12;
    double lambda = config.lm_initial_lambda;
    double chi2 = report.initial_chi2;

    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd b(idx.dim);
    Eigen::SparseMatrix<double> H(idx.dim, idx.dim);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;

    for (int iter = 0; iter < config.max_iter; ++iter) {
        report.iterations = iter + 1;
        build_normal_equations(graph, idx, triplets, b);
        for (int i = 0; i < idx.dim; ++i) triplets.emplace_back(i, i, 0.0);  // keep diagonal
        H.setFromTriplets(triplets.begin(), triplets.end());

        bool accepted = false;
        while (!accepted) {
            Eigen::SparseMatrix<double> damped = H;
            for (int i = 0; i < idx.dim; ++i) damped.coeffRef(i, i) += lambda;
            solver.compute(damped);
            bool solvable = solver.info() == Eigen::Success;
            Eigen::VectorXd delta;
            if (solvable) {
                delta = solver.solve(b);
                solvable = solver.info() == Eigen::Success && delta.allFinite();
            }
            if (!solvable) {
                if (lambda >= kLambdaMax)
                    throw NumericalError(
                        "normal equations stayed indefinite after damping reached " +
                        std::to_string(lambda));
                lambda *= 10.0;
                continue;
            }

            const Snapshot before = take_snapshot(graph);
            apply_step(graph, idx, delta);
            const double new_chi2 = graph.chi2();
            if (new_chi2 <= chi2) {
                accepted = true;
                lambda = std::max(lambda / 10.0, 1e-15);
                const double decrease = chi2 - new_chi2;
                chi2 = new_chi2;
                report.final_chi2 = chi2;
                if (decrease <= config.chi2_rel_tol * std::max(chi2, 1e-300)) {
                    report.converged = true;
                    report.termination = Termination::tolerance;
                    return report;
                }
            } else {
                restore_snapshot(graph, before);
                if (lambda >= kLambdaMax) {
                    // Cannot decrease chi2 anymore; stop at the best point found.
                    report.converged = false;
                    report.termination = Termination::lm_stall;
                    return report;
                }
                lambda *= 10.0;
            }
        }
    }
    report.termination = Termination::max_iter;
    report.converged = false;
    return report;
}

}  // namespace georeg
