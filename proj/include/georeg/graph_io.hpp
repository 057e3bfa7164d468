#pragma once

#include <iosfwd>
#include <string>

#include "georeg/graph.hpp"

namespace georeg {

// Line-oriented text graph format, a g2o-style dialect. '#' starts a comment.
//
//   VERTEX_SE2 id x y theta
//   VERTEX_XY id x y [kind]                          kind: pole|building_corner|other
//   FIX id
//   EDGE_SE2 from to dx dy dtheta i11 i12 i13 i22 i23 i33
//   EDGE_SE2_XY pose landmark mx my i11 i12 i22
//   EDGE_PRIOR_XY pose mx my i11 i12 i22
//   EDGE_ANCHOR_XY landmark mx my i11 i12 i22
//
// Numbers are written with 17 significant digits so doubles survive the round
// trip exactly; any finite decimal or scientific literal is accepted on read.

PoseGraph read_graph(std::istream& in, const std::string& filename = "<stream>");
PoseGraph read_graph_file(const std::string& path);

void write_graph(const PoseGraph& graph, std::ostream& out);
void write_graph_file(const PoseGraph& graph, const std::string& path);

std::string graph_to_string(const PoseGraph& graph);

}  // namespace georeg
