#include "georeg/projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "georeg/util.hpp"

namespace georeg {

std::vector<GlobalPoint> project_scans(const PoseGraph& graph, const std::vector<ScanFrame>& scans,
                                       const MapOrigin& origin) {
    std::vector<GlobalPoint> out;
    std::size_t total = 0;
    for (const ScanFrame& scan : scans) total += scan.points.size();
    out.reserve(total);
    for (const ScanFrame& scan : scans) {
        const Pose2& pose = graph.pose(scan.pose_vertex).estimate;
        for (const ScanPoint& sp : scan.points) {
            const Point2 utm = map_to_utm(transform_point(pose, {sp.x, sp.y}), origin);
            out.push_back({utm.x, utm.y, sp.intensity});
        }
    }
    return out;
}

RasterGrid rasterize(const std::vector<GlobalPoint>& points, double cell_size) {
    if (cell_size <= 0.0) throw ConfigError("cell_size: must be > 0");
    if (points.empty()) throw StructureError("rasterize: no points");

    double min_e = points[0].easting, max_e = points[0].easting;
    double min_n = points[0].northing, max_n = points[0].northing;
    for (const GlobalPoint& p : points) {
        min_e = std::min(min_e, p.easting);
        max_e = std::max(max_e, p.easting);
        min_n = std::min(min_n, p.northing);
        max_n = std::max(max_n, p.northing);
    }

    // Column c covers easting [ul_e + c*cell, ul_e + (c+1)*cell); row r covers
    // northing (ul_n - (r+1)*cell, ul_n - r*cell], matching the floor indexing
    // below so every point lands inside its cell's bounds.
    RasterGrid grid;
    grid.cell_size = cell_size;
    grid.ul_easting = min_e;
    grid.ul_northing = max_n;
    grid.width = static_cast<int>(std::floor((max_e - min_e) / cell_size)) + 1;
    grid.height = static_cast<int>(std::floor((max_n - min_n) / cell_size)) + 1;
    grid.cells.assign(static_cast<std::size_t>(grid.width) * grid.height, -1.0f);

    for (const GlobalPoint& p : points) {
        int col = static_cast<int>(std::floor((p.easting - grid.ul_easting) / cell_size));
        int row = static_cast<int>(std::floor((grid.ul_northing - p.northing) / cell_size));
        col = std::clamp(col, 0, grid.width - 1);
        row = std::clamp(row, 0, grid.height - 1);
        float& cell = grid.cells[static_cast<std::size_t>(row) * grid.width + col];
        cell = std::max(cell, static_cast<float>(p.intensity));
    }
    return grid;
}

void write_pgm(const RasterGrid& grid, const std::string& path) {
    std::ostringstream ss;
    ss << "P2\n" << grid.width << ' ' << grid.height << "\n255\n";
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            const float v = grid.at(r, c);
            const int grey = v < 0.0f ? 0 : static_cast<int>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
            ss << grey << (c + 1 == grid.width ? '\n' : ' ');
        }
    }
    write_file_atomic(path, ss.str());
}

void write_grid_sidecar(const RasterGrid& grid, const std::string& path) {
    std::ostringstream ss;
    ss << "cell_size,ul_easting,ul_northing,width,height\n"
       << format_double(grid.cell_size) << ',' << format_double(grid.ul_easting) << ','
       << format_double(grid.ul_northing) << ',' << grid.width << ',' << grid.height << '\n';
    write_file_atomic(path, ss.str());
}

}  // namespace georeg
