#pragma once

#include <string>
#include <utility>
#include <vector>

#include "georeg/projection.hpp"
#include "georeg/se2.hpp"
#include "georeg/ukf.hpp"

namespace georeg {

// CSV schemas used by the pipeline. Headers are mandatory and checked.
//
//   gps.csv        t,easting,northing,sigma
//   odom.csv       t,v,omega
//   path.csv       t,x,y,theta            (also used for truth.csv)
//   decisions.csv  t,easting,northing,d2,threshold,accepted
//   labels.csv     pole_id,easting,northing
//   keyframes.csv  vertex_id,t
//   scans.csv      pose_id,x,y,intensity
//   points.csv     easting,northing,intensity

std::vector<GpsFix> read_gps_csv(const std::string& path);
void write_gps_csv(const std::vector<GpsFix>& fixes, const std::string& path);

std::vector<OdomSample> read_odom_csv(const std::string& path);
void write_odom_csv(const std::vector<OdomSample>& samples, const std::string& path);

std::vector<std::pair<double, Pose2>> read_path_csv(const std::string& path);
void write_path_csv(const std::vector<std::pair<double, Pose2>>& poses, const std::string& path);

struct DecisionRow {
    double t = 0.0;
    double easting = 0.0;
    double northing = 0.0;
    double d2 = 0.0;
    double threshold = 0.0;
    bool accepted = false;
};
std::vector<DecisionRow> read_decisions_csv(const std::string& path);
void write_decisions_csv(const std::vector<DecisionRow>& rows, const std::string& path);

std::vector<std::pair<int, Point2>> read_labels_csv(const std::string& path);
void write_labels_csv(const std::vector<std::pair<int, Point2>>& labels, const std::string& path);

std::vector<std::pair<VertexId, double>> read_keyframes_csv(const std::string& path);
void write_keyframes_csv(const std::vector<std::pair<VertexId, double>>& rows,
                         const std::string& path);

std::vector<ScanFrame> read_scans_csv(const std::string& path);

void write_points_csv(const std::vector<GlobalPoint>& points, const std::string& path);

// MapOrigin as a one-line text file: `easting_offset northing_offset zone`.
MapOrigin read_origin_file(const std::string& path);
void write_origin_file(const MapOrigin& origin, const std::string& path);

}  // namespace georeg
