#pragma once

#include <string>
#include <vector>

#include "georeg/graph.hpp"
#include "georeg/se2.hpp"

namespace georeg {

struct ScanPoint {
    double x = 0.0;
    double y = 0.0;
    double intensity = 0.0;  // [0, 1]
};

// Horizontal-plane point set expressed in the sensor frame of one pose vertex.
struct ScanFrame {
    VertexId pose_vertex = 0;
    std::vector<ScanPoint> points;
};

struct GlobalPoint {
    double easting = 0.0;
    double northing = 0.0;
    double intensity = 0.0;
};

// Places every scan point into UTM through its pose vertex's optimized
// estimate. Output order follows input order.
std::vector<GlobalPoint> project_scans(const PoseGraph& graph, const std::vector<ScanFrame>& scans,
                                       const MapOrigin& origin);

// Max-intensity occupancy grid with world-file style georeferencing. Row 0 is
// the northernmost row; cells hold the maximum intensity of their points and
// -1 where empty.
struct RasterGrid {
    double cell_size = 0.0;
    double ul_easting = 0.0;    // west edge of column 0
    double ul_northing = 0.0;   // north edge of row 0
    int width = 0;
    int height = 0;
    std::vector<float> cells;   // row-major

    float at(int row, int col) const { return cells[static_cast<std::size_t>(row) * width + col]; }
};

RasterGrid rasterize(const std::vector<GlobalPoint>& points, double cell_size);

// Plain (ASCII) portable greymap, intensity scaled to 0..255, empty cells 0.
void write_pgm(const RasterGrid& grid, const std::string& path);

// Sidecar georeference: `cell_size,ul_easting,ul_northing,width,height`.
void write_grid_sidecar(const RasterGrid& grid, const std::string& path);

}  // namespace georeg
