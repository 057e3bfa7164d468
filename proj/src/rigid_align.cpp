#include "georeg/rigid_align.hpp"

#include <algorithm>
#include <cmath>

#include "georeg/graph.hpp"

namespace georeg {

Pose2 fit_se2(const CorrespondenceSet& c) {
    double wsum = 0.0;
    for (const auto& pair : c.pairs) {
        if (!(pair.weight >= 0.0) || !std::isfinite(pair.weight))
            throw NumericalError("fit_se2: weights must be finite and non-negative");
        wsum += pair.weight;
    }
    if (c.pairs.size() < 2 || wsum <= 0.0)
        throw NumericalError("fit_se2: need at least two weighted correspondences");

    Point2 local_centroid{0.0, 0.0}, global_centroid{0.0, 0.0};
    for (const auto& pair : c.pairs) {
        local_centroid = local_centroid + pair.local * pair.weight;
        global_centroid = global_centroid + pair.global * pair.weight;
    }
    local_centroid = local_centroid * (1.0 / wsum);
    global_centroid = global_centroid * (1.0 / wsum);

    double dot = 0.0, cross = 0.0, local_scatter = 0.0;
    for (const auto& pair : c.pairs) {
        const Point2 a = pair.local - local_centroid;
        const Point2 b = pair.global - global_centroid;
        dot += pair.weight * (a.x * b.x + a.y * b.y);
        cross += pair.weight * (a.x * b.y - a.y * b.x);
        local_scatter += pair.weight * a.squared_norm();
    }
    if (local_scatter <= 0.0)
        throw NumericalError("fit_se2: rank deficient, weighted local points are coincident");
    if (std::hypot(dot, cross) <= 1e-12 * local_scatter)
        throw NumericalError("fit_se2: rank deficient, rotation is undetermined by the pairing");

    const double theta = std::atan2(cross, dot);
    const double cs = std::cos(theta), sn = std::sin(theta);
    return Pose2(global_centroid.x - (cs * local_centroid.x - sn * local_centroid.y),
                 global_centroid.y - (sn * local_centroid.x + cs * local_centroid.y),
                 theta);
}

double alignment_chi2(const Pose2& T, const CorrespondenceSet& c) {
    double chi2 = 0.0;
    for (const auto& pair : c.pairs) {
        const Point2 moved = transform_point(T, pair.local);
        chi2 += pair.weight * (moved - pair.global).squared_norm();
    }
    return chi2;
}

void apply_to_map(const Pose2& T, std::vector<Pose2>& trajectory, std::vector<Point2>& landmarks) {
    for (Pose2& p : trajectory) p = compose(T, p);
    for (Point2& q : landmarks) q = transform_point(T, q);
}

void apply_to_graph(const Pose2& T, PoseGraph& graph) {
    for (const PoseVertex& v : graph.poses())
        graph.set_pose_estimate(v.id, compose(T, v.estimate));
    for (const LandmarkVertex& v : graph.landmarks())
        graph.set_landmark_estimate(v.id, transform_point(T, v.estimate));
}

CorrespondenceSet build_correspondences(const std::vector<std::pair<double, Pose2>>& local_path,
                                        const std::vector<GpsFix>& fixes, double max_dt,
                                        const std::vector<bool>* accepted) {
    if (accepted && accepted->size() != fixes.size())
        throw StructureError("build_correspondences: accepted flags do not match fixes");
    CorrespondenceSet set;
    if (local_path.empty() || fixes.empty())
        throw StructureError("build_correspondences: no correspondences found");
    if (!std::is_sorted(local_path.begin(), local_path.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; }))
        throw StructureError("build_correspondences: path is not time-sorted");
    if (!std::is_sorted(fixes.begin(), fixes.end(),
                        [](const GpsFix& a, const GpsFix& b) { return a.t < b.t; }))
        throw StructureError("build_correspondences: fixes are not time-sorted");
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        const GpsFix& fix = fixes[i];
        // Nearest timestamp via binary search on the sorted path.
        auto it = std::lower_bound(local_path.begin(), local_path.end(), fix.t,
                                   [](const auto& entry, double t) { return entry.first < t; });
        std::size_t best = it == local_path.end() ? local_path.size() - 1
                                                  : static_cast<std::size_t>(it - local_path.begin());
        if (best > 0 &&
            std::abs(local_path[best - 1].first - fix.t) <= std::abs(local_path[best].first - fix.t))
            best -= 1;
        if (std::abs(local_path[best].first - fix.t) > max_dt) continue;

        double weight = fix.nominal_sigma > 0.0 ? 1.0 / (fix.nominal_sigma * fix.nominal_sigma) : 1.0;
        if (accepted && !(*accepted)[i]) weight = 0.0;
        set.pairs.push_back({local_path[best].second.translation(),
                             Point2(fix.easting, fix.northing), weight});
    }
    if (set.pairs.empty())
        throw StructureError("build_correspondences: no fix matched a path pose within max_dt");
    return set;
}

}  // namespace georeg
