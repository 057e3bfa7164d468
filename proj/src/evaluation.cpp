#include "georeg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "georeg/simulator.hpp"

namespace georeg {

std::vector<LabelMatch> match_labels(const PoseGraph& graph, const std::vector<Point2>& labels,
                                     double radius) {
    const auto& landmarks = graph.landmarks();
    std::vector<LabelMatch> matches;
    if (landmarks.empty() || labels.empty()) return matches;

    // nearest label for each landmark, nearest landmark for each label
    auto nearest = [](const Point2& p, auto&& positions, std::size_t count) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < count; ++i) {
            const double d = (positions(i) - p).norm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return std::make_pair(best, best_d);
    };
    auto label_at = [&](std::size_t i) { return labels[i]; };
    auto landmark_at = [&](std::size_t i) { return landmarks[i].estimate; };

    for (std::size_t li = 0; li < landmarks.size(); ++li) {
        const auto [lbl, d] = nearest(landmarks[li].estimate, label_at, labels.size());
        if (d > radius) continue;
        const auto [lm_back, d2] = nearest(labels[lbl], landmark_at, landmarks.size());
        if (lm_back == li) matches.push_back({landmarks[li].id, labels[lbl]});
    }
    return matches;
}

namespace {

// C(m, n) saturating at a large sentinel to avoid overflow.
long combination_count(int m, int n, long cap) {
    if (n < 0 || n > m) return 0;
    long result = 1;
    for (int i = 1; i <= n; ++i) {
        result = result * (m - n + i) / i;
        if (result > 4 * cap) return 4 * cap;  // plenty to know we exceed the cap
    }
    return result;
}

std::vector<std::vector<int>> enumerate_combinations(int m, int n) {
    std::vector<std::vector<int>> all;
    std::vector<int> current(n);
    for (int i = 0; i < n; ++i) current[i] = i;
    while (true) {
        all.push_back(current);
        int k = n - 1;
        while (k >= 0 && current[k] == m - n + k) --k;
        if (k < 0) break;
        ++current[k];
        for (int j = k + 1; j < n; ++j) current[j] = current[j - 1] + 1;
    }
    if (n == 0) all.assign(1, {});
    return all;
}

std::vector<std::vector<int>> sample_combinations(int m, int n, long count, std::uint64_t seed) {
    Rng rng(Rng::derive(seed, 11));
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> out;
    std::vector<int> pool(m);
    while (static_cast<long>(out.size()) < count) {
        for (int i = 0; i < m; ++i) pool[i] = i;
        std::vector<int> pick(n);
        for (int i = 0; i < n; ++i) {
            const int j = i + static_cast<int>(rng.next_u64() % (m - i));
            std::swap(pool[i], pool[j]);
            pick[i] = pool[i];
        }
        std::sort(pick.begin(), pick.end());
        if (seen.insert(pick).second) out.push_back(std::move(pick));
    }
    return out;
}

}  // namespace

bool point_in_polygon(const Point2& p, const std::vector<Point2>& polygon) {
    if (polygon.size() < 3) return false;
    bool inside = false;
    for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[j];
        // On-edge points count as inside.
        const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if (std::abs(cross) < 1e-12 && std::min(a.x, b.x) - 1e-12 <= p.x &&
            p.x <= std::max(a.x, b.x) + 1e-12 && std::min(a.y, b.y) - 1e-12 <= p.y &&
            p.y <= std::max(a.y, b.y) + 1e-12)
            return true;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_at = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (x_at > p.x) inside = !inside;
        }
    }
    return inside;
}

EvalReport evaluate_curve(const PoseGraph& graph, const std::vector<LabelMatch>& matched,
                          const EvalConfig& config) {
    if (matched.empty()) throw StructureError("evaluate_curve: no matched labels");
    if (config.max_combinations < 1) throw ConfigError("max_combinations: must be >= 1");

    std::vector<LabelMatch> pool = matched;
    if (!config.region_filter.empty()) {
        std::erase_if(pool, [&](const LabelMatch& m) {
            return !point_in_polygon(m.label, config.region_filter);
        });
        if (pool.empty()) throw StructureError("evaluate_curve: region filter removed every label");
    }
    const int m = static_cast<int>(pool.size());

    EvalReport report;
    for (const int n : config.n_values) {
        if (n < 0 || n >= m)
            throw ConfigError("n_values: n must satisfy 0 <= n < matched labels (" +
                              std::to_string(m) + "), got " + std::to_string(n));

        const long total = combination_count(m, n, config.max_combinations);
        const auto combos = total <= config.max_combinations
                                ? enumerate_combinations(m, n)
                                : sample_combinations(m, n, config.max_combinations,
                                                      config.sample_seed);

        EvalRow row;
        row.n = n;
        std::vector<double> means;
        means.reserve(combos.size());
        for (const auto& combo : combos) {
            PoseGraph clone = graph;
            std::vector<std::pair<VertexId, Point2>> anchors;
            std::vector<bool> anchored(pool.size(), false);
            anchors.reserve(combo.size());
            for (const int i : combo) {
                anchors.emplace_back(pool[i].landmark, pool[i].label);
                anchored[i] = true;
            }
            attach_anchor_priors(clone, anchors, config.anchor_sigma);
            try {
                optimize(clone, config.opt);
            } catch (const Error&) {
                ++row.failed;
                continue;
            }
            double err_sum = 0.0;
            int held_out = 0;
            for (std::size_t i = 0; i < pool.size(); ++i) {
                if (anchored[i]) continue;
                err_sum += (clone.landmark(pool[i].landmark).estimate - pool[i].label).norm();
                ++held_out;
            }
            if (held_out > 0) means.push_back(err_sum / held_out);
        }
        row.combinations_evaluated = static_cast<long>(means.size());
        if (!means.empty()) {
            double sum = 0.0;
            for (const double v : means) sum += v;
            row.mean_holdout_error = sum / means.size();
            double sq = 0.0;
            for (const double v : means) sq += (v - row.mean_holdout_error) * (v - row.mean_holdout_error);
            row.stddev = means.size() > 1 ? std::sqrt(sq / (means.size() - 1)) : 0.0;
        }
        report.rows.push_back(row);
    }

    // Residual table from anchoring every matched landmark.
    {
        PoseGraph clone = graph;
        std::vector<std::pair<VertexId, Point2>> anchors;
        anchors.reserve(pool.size());
        for (const LabelMatch& match : pool) anchors.emplace_back(match.landmark, match.label);
        attach_anchor_priors(clone, anchors, config.anchor_sigma);
        optimize(clone, config.opt);
        for (const LabelMatch& match : pool) {
            const Point2 est = clone.landmark(match.landmark).estimate;
            report.final_residuals.push_back(
                {match.landmark, match.label, est, (est - match.label).norm()});
        }
    }
    return report;
}

}  // namespace georeg
