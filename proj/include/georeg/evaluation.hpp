#pragma once

#include <cstdint>
#include <vector>

#include "georeg/graph.hpp"
#include "georeg/se2.hpp"

namespace georeg {

struct LabelMatch {
    VertexId landmark = 0;
    Point2 label;  // map frame
};

// Mutual-nearest-neighbor pairing of landmark vertices and label positions
// within `radius` meters. Each landmark and each label is used at most once;
// unmatched labels are simply not returned.
std::vector<LabelMatch> match_labels(const PoseGraph& graph, const std::vector<Point2>& labels,
                                     double radius);

struct EvalConfig {
    std::vector<int> n_values;
    long max_combinations = 1000;
    std::uint64_t sample_seed = 0;
    double anchor_sigma = 0.1;   // m
    double match_radius = 3.0;   // m (used by callers that still need matching)
    std::vector<Point2> region_filter;  // optional polygon over label positions
    OptimizeConfig opt;
};

struct EvalRow {
    int n = 0;
    long combinations_evaluated = 0;
    double mean_holdout_error = 0.0;  // m
    double stddev = 0.0;              // of the per-combination means
    long failed = 0;                  // optimizer failures, excluded from the stats
};

struct LandmarkResidual {
    VertexId landmark = 0;
    Point2 label;
    Point2 estimate;
    double error = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::vector<LandmarkResidual> final_residuals;  // from anchoring every match
};

// Leave-out accuracy protocol: for each n, anchor every combination of n
// matched landmarks (all of them when C(m, n) <= max_combinations, otherwise
// max_combinations distinct subsets drawn with sample_seed), re-optimize a
// clone of the graph, and average the held-out landmarks' distance to their
// labels. The input graph is never mutated.
EvalReport evaluate_curve(const PoseGraph& graph, const std::vector<LabelMatch>& matched,
                          const EvalConfig& config);

// Ray-casting point-in-polygon test (boundary counts as inside).
bool point_in_polygon(const Point2& p, const std::vector<Point2>& polygon);

}  // namespace georeg
