#include "georeg/graph_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "georeg/util.hpp"

namespace georeg {

namespace {

struct Token {
    std::string text;
    int column = 0;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size() || line[i] == '#') break;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
               line[i] != '#')
            ++i;
        tokens.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return tokens;
}

class LineParser {
public:
    LineParser(const std::string& file, int line, const std::vector<Token>& tokens)
        : file_(file), line_(line), tokens_(tokens) {}

    bool done() const { return next_ >= tokens_.size(); }
    std::size_t remaining() const { return tokens_.size() - next_; }

    [[noreturn]] void fail(const std::string& msg, int column) const {
        throw ParseError(file_, line_, column, msg);
    }

    const Token& take(const char* what) {
        if (done()) {
            int col = tokens_.empty() ? 1 : tokens_.back().column + static_cast<int>(tokens_.back().text.size());
            fail(std::string("missing ") + what, col);
        }
        return tokens_[next_++];
    }

    double number(const char* what) {
        const Token& tok = take(what);
        double value = 0.0;
        const char* begin = tok.text.data();
        const char* end = begin + tok.text.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr != end)
            fail(std::string("expected a number for ") + what + ", got '" + tok.text + "'",
                 tok.column);
        if (!std::isfinite(value))
            fail(std::string("non-finite value for ") + what, tok.column);
        return value;
    }

    VertexId id(const char* what) {
        const Token& tok = take(what);
        VertexId value = 0;
        const char* begin = tok.text.data();
        const char* end = begin + tok.text.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr != end)
            fail(std::string("expected an integer id for ") + what + ", got '" + tok.text + "'",
                 tok.column);
        return value;
    }

private:
    const std::string& file_;
    int line_;
    const std::vector<Token>& tokens_;
    std::size_t next_ = 0;
};

Info2 info2_from(LineParser& p) {
    const double i11 = p.number("i11");
    const double i12 = p.number("i12");
    const double i22 = p.number("i22");
    Info2 m;
    m << i11, i12, i12, i22;
    return m;
}

Info3 info3_from(LineParser& p) {
    const double i11 = p.number("i11");
    const double i12 = p.number("i12");
    const double i13 = p.number("i13");
    const double i22 = p.number("i22");
    const double i23 = p.number("i23");
    const double i33 = p.number("i33");
    Info3 m;
    m << i11, i12, i13, i12, i22, i23, i13, i23, i33;
    return m;
}

const char* kind_name(LandmarkKind kind) {
    switch (kind) {
        case LandmarkKind::pole: return "pole";
        case LandmarkKind::building_corner: return "building_corner";
        case LandmarkKind::other: return "other";
    }
    return "other";
}

}  // namespace

PoseGraph read_graph(std::istream& in, const std::string& filename) {
    PoseGraph graph;
    std::string line;
    int line_no = 0;
    std::vector<VertexId> fixes;
    std::vector<int> fix_lines;
    std::vector<int> fix_cols;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        LineParser p(filename, line_no, tokens);
        const Token& tag = p.take("record tag");
        try {
            if (tag.text == "VERTEX_SE2") {
                const VertexId id = p.id("id");
                const double x = p.number("x");
                const double y = p.number("y");
                const double theta = p.number("theta");
                graph.add_pose(id, Pose2(x, y, theta));
            } else if (tag.text == "VERTEX_XY") {
                const VertexId id = p.id("id");
                const double x = p.number("x");
                const double y = p.number("y");
                LandmarkKind kind = LandmarkKind::pole;
                if (!p.done()) {
                    const Token& k = p.take("kind");
                    if (k.text == "pole") kind = LandmarkKind::pole;
                    else if (k.text == "building_corner") kind = LandmarkKind::building_corner;
                    else if (k.text == "other") kind = LandmarkKind::other;
                    else p.fail("unknown landmark kind '" + k.text + "'", k.column);
                }
                graph.add_landmark(id, Point2(x, y), kind);
            } else if (tag.text == "FIX") {
                // FIX may precede its vertex line in hand-written files; defer.
                const int col = p.done() ? tag.column : tokens[1].column;
                fixes.push_back(p.id("id"));
                fix_lines.push_back(line_no);
                fix_cols.push_back(col);
            } else if (tag.text == "EDGE_SE2") {
                const VertexId from = p.id("from");
                const VertexId to = p.id("to");
                const double dx = p.number("dx");
                const double dy = p.number("dy");
                const double dtheta = p.number("dtheta");
                graph.add_edge(RelPoseEdge{from, to, Pose2(dx, dy, dtheta), info3_from(p)});
            } else if (tag.text == "EDGE_SE2_XY") {
                const VertexId pose = p.id("pose");
                const VertexId landmark = p.id("landmark");
                const double mx = p.number("mx");
                const double my = p.number("my");
                graph.add_edge(LandmarkObsEdge{pose, landmark, Point2(mx, my), info2_from(p)});
            } else if (tag.text == "EDGE_PRIOR_XY") {
                const VertexId pose = p.id("pose");
                const double mx = p.number("mx");
                const double my = p.number("my");
                graph.add_edge(GpsPriorEdge{pose, Point2(mx, my), info2_from(p)});
            } else if (tag.text == "EDGE_ANCHOR_XY") {
                const VertexId landmark = p.id("landmark");
                const double mx = p.number("mx");
                const double my = p.number("my");
                graph.add_edge(AnchorPriorEdge{landmark, Point2(mx, my), info2_from(p)});
            } else {
                p.fail("unknown record tag '" + tag.text + "'", tag.column);
            }
        } catch (const StructureError& e) {
            throw ParseError(filename, line_no, tag.column, e.what());
        }
        if (!p.done()) {
            const Token& extra = p.take("");
            p.fail("unexpected trailing token '" + extra.text + "'", extra.column);
        }
    }
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        try {
            graph.set_fixed(fixes[i], true);
        } catch (const StructureError& e) {
            throw ParseError(filename, fix_lines[i], fix_cols[i], e.what());
        }
    }
    return graph;
}

PoseGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);
    return read_graph(in, path);
}

void write_graph(const PoseGraph& graph, std::ostream& out) {
    auto num = [](double v) { return format_double(v); };
    for (const PoseVertex& v : graph.poses()) {
        out << "VERTEX_SE2 " << v.id << ' ' << num(v.estimate.x) << ' ' << num(v.estimate.y)
            << ' ' << num(v.estimate.theta) << '\n';
    }
    for (const LandmarkVertex& v : graph.landmarks()) {
        out << "VERTEX_XY " << v.id << ' ' << num(v.estimate.x) << ' ' << num(v.estimate.y)
            << ' ' << kind_name(v.kind) << '\n';
    }
    for (const PoseVertex& v : graph.poses()) {
        if (v.fixed) out << "FIX " << v.id << '\n';
    }
    for (const Edge& edge : graph.edges()) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, RelPoseEdge>) {
                    out << "EDGE_SE2 " << e.from << ' ' << e.to << ' ' << num(e.meas.x) << ' '
                        << num(e.meas.y) << ' ' << num(e.meas.theta) << ' ' << num(e.info(0, 0))
                        << ' ' << num(e.info(0, 1)) << ' ' << num(e.info(0, 2)) << ' '
                        << num(e.info(1, 1)) << ' ' << num(e.info(1, 2)) << ' '
                        << num(e.info(2, 2)) << '\n';
                } else if constexpr (std::is_same_v<T, LandmarkObsEdge>) {
                    out << "EDGE_SE2_XY " << e.pose << ' ' << e.landmark << ' ' << num(e.meas.x)
                        << ' ' << num(e.meas.y) << ' ' << num(e.info(0, 0)) << ' '
                        << num(e.info(0, 1)) << ' ' << num(e.info(1, 1)) << '\n';
                } else if constexpr (std::is_same_v<T, GpsPriorEdge>) {
                    out << "EDGE_PRIOR_XY " << e.pose << ' ' << num(e.meas.x) << ' '
                        << num(e.meas.y) << ' ' << num(e.info(0, 0)) << ' ' << num(e.info(0, 1))
                        << ' ' << num(e.info(1, 1)) << '\n';
                } else {
                    out << "EDGE_ANCHOR_XY " << e.landmark << ' ' << num(e.meas.x) << ' '
                        << num(e.meas.y) << ' ' << num(e.info(0, 0)) << ' ' << num(e.info(0, 1))
                        << ' ' << num(e.info(1, 1)) << '\n';
                }
            },
            edge);
    }
}

void write_graph_file(const PoseGraph& graph, const std::string& path) {
    write_file_atomic(path, graph_to_string(graph));
}

std::string graph_to_string(const PoseGraph& graph) {
    std::ostringstream ss;
    write_graph(graph, ss);
    return ss.str();
}

}  // namespace georeg
