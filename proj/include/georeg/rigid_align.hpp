#pragma once

#include <utility>
#include <vector>

#include "georeg/se2.hpp"
#include "georeg/ukf.hpp"

namespace georeg {

class PoseGraph;

struct Correspondence {
    Point2 local;
    Point2 global;
    double weight = 1.0;
};

struct CorrespondenceSet {
    std::vector<Correspondence> pairs;
};

// Weighted closed-form SE2 fit: argmin_T sum_i w_i |T(local_i) - global_i|^2.
// Rotation comes from atan2 over the centered cross/dot sums, translation from
// the weighted centroids. Throws NumericalError when the weighted local points
// carry no usable geometry (zero weight mass, coincident locals, or a rotation
// left undetermined by the pairing).
Pose2 fit_se2(const CorrespondenceSet& c);

// Weighted sum of squared residuals of transform T on the correspondences.
double alignment_chi2(const Pose2& T, const CorrespondenceSet& c);

// Rigidly moves a whole map: every pose becomes T * pose, every landmark is
// transformed as a point.
void apply_to_map(const Pose2& T, std::vector<Pose2>& trajectory, std::vector<Point2>& landmarks);

// Same transform applied to every vertex estimate of a graph.
void apply_to_graph(const Pose2& T, PoseGraph& graph);

// Pairs every fix with the temporally nearest path pose within max_dt seconds.
// Weight is 1/sigma^2 (unit weight when a fix carries no sigma); when
// `accepted` is given, fixes rejected by the filter gate get weight 0.
// Unmatched fixes are dropped; zero resulting pairs is an error.
CorrespondenceSet build_correspondences(const std::vector<std::pair<double, Pose2>>& local_path,
                                        const std::vector<GpsFix>& fixes, double max_dt,
                                        const std::vector<bool>* accepted = nullptr);

}  // namespace georeg
