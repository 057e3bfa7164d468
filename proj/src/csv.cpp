#include "georeg/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "georeg/errors.hpp"
#include "georeg/util.hpp"

namespace georeg {

namespace {

struct CsvReader {
    std::string path;
    std::ifstream in;
    std::string line;
    int line_no = 0;

    explicit CsvReader(const std::string& p, const std::string& expected_header) : path(p), in(p) {
        if (!in) throw Error("cannot open: " + p);
        if (!std::getline(in, line)) throw ParseError(path, 1, 1, "empty file, expected header");
        ++line_no;
        if (strip(line) != expected_header)
            throw ParseError(path, 1, 1, "expected header '" + expected_header + "', got '" +
                                             strip(line) + "'");
    }

    static std::string strip(std::string s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ')) s.pop_back();
        return s;
    }

    bool next_row(std::vector<std::string>& fields, std::vector<int>& columns) {
        while (std::getline(in, line)) {
            ++line_no;
            const std::string stripped = strip(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            fields.clear();
            columns.clear();
            std::size_t start = 0;
            while (true) {
                const std::size_t comma = stripped.find(',', start);
                columns.push_back(static_cast<int>(start) + 1);
                if (comma == std::string::npos) {
                    fields.push_back(stripped.substr(start));
                    break;
                }
                fields.push_back(stripped.substr(start, comma - start));
                start = comma + 1;
            }
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(int column, const std::string& msg) const {
        throw ParseError(path, line_no, column, msg);
    }

    double number(const std::vector<std::string>& fields, const std::vector<int>& columns,
                  std::size_t idx, const char* what) {
        if (idx >= fields.size()) fail(static_cast<int>(line.size()) + 1, std::string("missing ") + what);
        double value = 0.0;
        const std::string& f = fields[idx];
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
        if (ec != std::errc() || ptr != f.data() + f.size())
            fail(columns[idx], std::string("expected a number for ") + what + ", got '" + f + "'");
        if (!std::isfinite(value)) fail(columns[idx], std::string("non-finite ") + what);
        return value;
    }

    long long integer(const std::vector<std::string>& fields, const std::vector<int>& columns,
                      std::size_t idx, const char* what) {
        if (idx >= fields.size()) fail(static_cast<int>(line.size()) + 1, std::string("missing ") + what);
        long long value = 0;
        const std::string& f = fields[idx];
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
        if (ec != std::errc() || ptr != f.data() + f.size())
            fail(columns[idx], std::string("expected an integer for ") + what + ", got '" + f + "'");
        return value;
    }

    void expect_width(const std::vector<std::string>& fields, std::size_t width) {
        if (fields.size() != width)
            fail(1, "expected " + std::to_string(width) + " fields, got " +
                     std::to_string(fields.size()));
    }
};

}  // namespace

std::vector<GpsFix> read_gps_csv(const std::string& path) {
    CsvReader r(path, "t,easting,northing,sigma");
    std::vector<GpsFix> out;
    std::vector<std::string> f;
    std::vector<int> c;
    while (r.next_row(f, c)) {
        r.expect_width(f, 4);
        GpsFix fix;
        fix.t = r.number(f, c, 0, "t");
        fix.easting = r.number(f, c, 1, "easting");
        fix.northing = r.number(f, c, 2, "northing");
        fix.nominal_sigma = r.number(f, c, 3, "sigma");
        if (!out.empty() && fix.t <= out.back().t)
            r.fail(c[0], "timestamps must be strictly increasing");
        out.push_back(fix);
    }
    return out;
}

void write_gps_csv(const std::vector<GpsFix>& fixes, const std::string& path) {
    std::ostringstream ss;
    ss << "t,easting,northing,sigma\n";
    for (const GpsFix& fix : fixes)
        ss << format_double(fix.t) << ',' << format_double(fix.easting) << ','
           << format_double(fix.northing) << ',' << format_double(fix.nominal_sigma) << '\n';
    write_file_atomic(path, ss.str());
}

std::vector<OdomSample> read_odom_csv(const std::string& path) {
    CsvReader r(path, "t,v,omega");
    std::vector<OdomSample> out;
    std::vector<std::string> f;
    std::vector<int> c;
    while (r.next_row(f, c)) {
        r.expect_width(f, 3);
        OdomSample s;
        s.t = r.number(f, c, 0, "t");
        s.v = r.number(f, c, 1, "v");
        s.omega = r.number(f, c, 2, "omega");
        if (!out.empty() && s.t <= out.back().t)
            r.fail(c[0], "timestamps must be strictly increasing");
        out.push_back(s);
    }
    return out;
}

void write_odom_csv(const std::vector<OdomSample>& samples, const std::string& path) {
    std::ostringstream ss;
    ss << "t,v,omega\n";
    for (const OdomSample& s : samples)
        ss << format_double(s.t) << ',' << format_double(s.v) << ',' << format_double(s.omega)
           << '\n';
    write_file_atomic(path, ss.str());
}

std::vector<std::pair<double, Pose2>> read_path_csv(const std::string& path) {
    CsvReader r(path, "t,x,y,theta");
    std::vector<std::pair<double, Pose2>> out;
    std::vector<std::string> f;
    std::vector<int> c;
    while (r.next_row(f, c)) {
        r.expect_width(f, 4);
        const double t = r.number(f, c, 0, "t");
        const double x = r.number(f, c, 1, "x");
        const double y = r.number(f, c, 2, "y");
        const double theta = r.number(f, c, 3, "theta");
        if (!out.empty() && t <= out.back().first)
            r.fail(c[0], "timestamps must be strictly increasing");
        out.emplace_back(t, Pose2(x, y, theta));
    }
    return out;
}

void write_path_csv(const std::vector<std::pair<double, Pose2>>& poses, const std::string& path) {
    std::ostringstream ss;
    ss << "t,x,y,theta\n";
    for (const auto& [t, pose] : poses)
        ss << format_double(t) << ',' << format_double(pose.x) << ',' << format_double(pose.y)
           << ',' << format_double(pose.theta) << '\n';
    write_file_atomic(path, ss.str());
}

std::vector<DecisionRow> read_decisions_csv(const std::string& path) {
    CsvReader r(path, "t,easting,northing,d2,threshold,accepted");
    std::vector<DecisionRow> out;
    std::vector<std::string> f;
    std::vector<int> c;
    while (r.next_row(f, c)) {
        r.expect_width(f, 6);
        DecisionRow row;
        row.t = r.number(f, c, 0, "t");
        row.easting = r.number(f, c, 1, "easting");
        row.northing = r.number(f, c, 2, "northing");
        row.d2 = r.number(f, c, 3, "d2");
        row.threshold = r.number(f, c, 4, "threshold");
        row.accepted = r.integer(f, c, 5, "accepted") != 0;
        out.push_back(row);
    }
    return out;
}

void write_decisions_csv(const std::vector<DecisionRow>& rows, const std::string& path) {
    std::ostringstream ss;
    ss << "t,easting,northing,d2,threshold,accepted\n";
    for (const DecisionRow& row : rows)
        ss << format_double(row.t) << ',' << format_double(row.easting) << ','
           << format_double(row.northing) << ',' << format_double(row.d2) << ','
           << format_double(row.threshold) << ',' << (row.accepted ? 1 : 0) << '\n';
    write_file_atomic(path, ss.str());
}

std::vector<std::pair<int, Point2>> read_labels_csv(const std::string& path) {
    CsvReader r(path, "pole_id,easting,northing");
    std::vector<std::pair<int, Point2>> out;
    std::vector<std::string> f;
    std::vector<int> c;
    while (r.next_row(f, c)) {
        r.expect_width(f, 3);
        const int id = static_cast<int>(r.integer(f, c, 0, "pole_id"));
        const double e = r.number(f, c, 1, "easting");
        const double n = r.number(f, c, 2, "northing");
        out.emplace_back(id, Point2(e, n));
    }
    return out;
}

void write_labels_csv(const std::vector<std::pair<int, Point2>>& labels, const std::string& path) {
    std::ostringstream ss;
    ss << "pole_id,easting,northing\n";
    for (const auto& [id, p] : labels)
        ss << id << ',' << format_double(p.x) << ',' << format_double(p.y) << '\n';
    write_file_atomic(path, ss.str());
}

std::vector<std::pair<VertexId, double>> read_keyframes_csv(const std::string& path) {
    CsvReader r(path, "vertex_id,t");
    std::vector<std::pair<VertexId, double>> out;
    std::vector<std::string> f;
    std::vector<int> c;
    while (r.next_row(f, c)) {
        r.expect_width(f, 2);
        const VertexId id = r.integer(f, c, 0, "vertex_id");
        const double t = r.number(f, c, 1, "t");
        out.emplace_back(id, t);
    }
    return out;
}

void write_keyframes_csv(const std::vector<std::pair<VertexId, double>>& rows,
                         const std::string& path) {
    std::ostringstream ss;
    ss << "vertex_id,t\n";
    for (const auto& [id, t] : rows) ss << id << ',' << format_double(t) << '\n';
    write_file_atomic(path, ss.str());
}

std::vector<ScanFrame> read_scans_csv(const std::string& path) {
    CsvReader r(path, "pose_id,x,y,intensity");
    std::vector<ScanFrame> out;
    std::vector<std::string> f;
    std::vector<int> c;
    while (r.next_row(f, c)) {
        r.expect_width(f, 4);
        const VertexId id = r.integer(f, c, 0, "pose_id");
        ScanPoint p;
        p.x = r.number(f, c, 1, "x");
        p.y = r.number(f, c, 2, "y");
        p.intensity = r.number(f, c, 3, "intensity");
        if (out.empty() || out.back().pose_vertex != id) out.push_back({id, {}});
        out.back().points.push_back(p);
    }
    return out;
}

void write_points_csv(const std::vector<GlobalPoint>& points, const std::string& path) {
    std::ostringstream ss;
    ss << "easting,northing,intensity\n";
    for (const GlobalPoint& p : points)
        ss << format_double(p.easting) << ',' << format_double(p.northing) << ','
           << format_double(p.intensity) << '\n';
    write_file_atomic(path, ss.str());
}

MapOrigin read_origin_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);
    MapOrigin origin;
    if (!(in >> origin.easting_offset >> origin.northing_offset))
        throw ParseError(path, 1, 1, "expected: easting_offset northing_offset [zone]");
    in >> origin.zone_label;  // optional
    if (!std::isfinite(origin.easting_offset) || !std::isfinite(origin.northing_offset))
        throw ParseError(path, 1, 1, "non-finite origin offsets");
    return origin;
}

void write_origin_file(const MapOrigin& origin, const std::string& path) {
    std::ostringstream ss;
    ss << format_double(origin.easting_offset) << ' ' << format_double(origin.northing_offset);
    if (!origin.zone_label.empty()) ss << ' ' << origin.zone_label;
    ss << '\n';
    write_file_atomic(path, ss.str());
}

}  // namespace georeg
