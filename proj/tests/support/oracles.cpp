#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/LU>

namespace oracle {

using georeg::Point2;
using georeg::Pose2;
using georeg::PoseGraph;

Eigen::Matrix3d mat_of(const Pose2& p) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    const double c = std::cos(p.theta), s = std::sin(p.theta);
    m(0, 0) = c;
    m(0, 1) = -s;
    m(1, 0) = s;
    m(1, 1) = c;
    m(0, 2) = p.x;
    m(1, 2) = p.y;
    return m;
}

Pose2 pose_of(const Eigen::Matrix3d& m) {
    return Pose2(m(0, 2), m(1, 2), std::atan2(m(1, 0), m(0, 0)));
}

Pose2 compose(const Pose2& a, const Pose2& b) {
    return pose_of(Eigen::Matrix3d(mat_of(a) * mat_of(b)));
}

Pose2 inverse(const Pose2& p) {
    return pose_of(Eigen::Matrix3d(mat_of(p).inverse()));
}

Point2 transform(const Pose2& p, const Point2& q) {
    const Eigen::Vector3d v = mat_of(p) * Eigen::Vector3d(q.x, q.y, 1.0);
    return {v(0), v(1)};
}

Eigen::Vector3d relpose_residual(const Pose2& meas, const Pose2& from, const Pose2& to) {
    const Eigen::Matrix3d err =
        mat_of(meas).inverse() * (mat_of(from).inverse() * mat_of(to));
    return {err(0, 2), err(1, 2), std::atan2(err(1, 0), err(0, 0))};
}

Eigen::VectorXd get_free_params(const PoseGraph& graph) {
    std::vector<double> values;
    for (const auto& v : graph.poses()) {
        if (v.fixed) continue;
        values.push_back(v.estimate.x);
        values.push_back(v.estimate.y);
        values.push_back(v.estimate.theta);
    }
    for (const auto& v : graph.landmarks()) {
        values.push_back(v.estimate.x);
        values.push_back(v.estimate.y);
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void set_free_params(PoseGraph& graph, const Eigen::VectorXd& x) {
    Eigen::Index i = 0;
    for (const auto& v : graph.poses()) {
        if (v.fixed) continue;
        graph.set_pose_estimate(v.id, Pose2(x(i), x(i + 1), x(i + 2)));
        i += 3;
    }
    for (const auto& v : graph.landmarks()) {
        graph.set_landmark_estimate(v.id, Point2(x(i), x(i + 1)));
        i += 2;
    }
}

double chi2_at(PoseGraph graph, const Eigen::VectorXd& x) {
    set_free_params(graph, x);
    return graph.chi2();
}

Eigen::MatrixXd fd_jacobian(const PoseGraph& graph, const georeg::Edge& edge,
                            georeg::VertexId vertex, double step) {
    const bool is_pose = graph.has_pose(vertex);
    const int cols = is_pose ? 3 : 2;
    PoseGraph work = graph;
    const Eigen::VectorXd r0 = georeg::residual(edge, work);
    Eigen::MatrixXd jac(r0.size(), cols);
    for (int k = 0; k < cols; ++k) {
        auto perturb = [&](double delta) {
            if (is_pose) {
                Pose2 p = graph.pose(vertex).estimate;
                if (k == 0) p.x += delta;
                if (k == 1) p.y += delta;
                if (k == 2) p = Pose2(p.x, p.y, p.theta + delta);
                work.set_pose_estimate(vertex, p);
            } else {
                Point2 q = graph.landmark(vertex).estimate;
                if (k == 0) q.x += delta;
                if (k == 1) q.y += delta;
                work.set_landmark_estimate(vertex, q);
            }
        };
        perturb(step);
        Eigen::VectorXd plus = georeg::residual(edge, work);
        perturb(-step);
        Eigen::VectorXd minus = georeg::residual(edge, work);
        // Angle residuals may wrap; compare on the circle.
        for (Eigen::Index r = 0; r < plus.size(); ++r) {
            double diff = plus(r) - minus(r);
            if (r0.size() == 3 && r == 2) diff = georeg::normalize_angle(diff);
            jac(r, k) = diff / (2.0 * step);
        }
    }
    // restore is implicit: `work` is a copy
    return jac;
}

double rigid_grid_chi2(const georeg::CorrespondenceSet& c) {
    auto chi2_at_theta = [&](double theta) {
        double wsum = 0.0;
        Point2 lc{0, 0}, gc{0, 0};
        for (const auto& p : c.pairs) {
            wsum += p.weight;
            lc = lc + p.local * p.weight;
            gc = gc + p.global * p.weight;
        }
        lc = lc * (1.0 / wsum);
        gc = gc * (1.0 / wsum);
        const double cs = std::cos(theta), sn = std::sin(theta);
        const georeg::Pose2 T(gc.x - (cs * lc.x - sn * lc.y), gc.y - (sn * lc.x + cs * lc.y),
                              theta);
        return georeg::alignment_chi2(T, c);
    };

    double best_theta = 0.0;
    double best = std::numeric_limits<double>::infinity();
    double step = 1e-4;
    for (double t = -georeg::kPi; t <= georeg::kPi; t += step) {
        const double v = chi2_at_theta(t);
        if (v < best) {
            best = v;
            best_theta = t;
        }
    }
    for (int level = 0; level < 4; ++level) {
        const double lo = best_theta - step, hi = best_theta + step;
        step *= 0.01;
        for (double t = lo; t <= hi; t += step) {
            const double v = chi2_at_theta(t);
            if (v < best) {
                best = v;
                best_theta = t;
            }
        }
    }
    return best;
}

double nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd& x,
                   double initial_step, int max_iter, double ftol) {
    const Eigen::Index n = x.size();
    std::vector<Eigen::VectorXd> simplex(n + 1, x);
    std::vector<double> value(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) simplex[i + 1](i) += initial_step;
    for (Eigen::Index i = 0; i <= n; ++i) value[i] = f(simplex[i]);

    auto order = [&] {
        std::vector<Eigen::Index> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(),
                  [&](Eigen::Index a, Eigen::Index b) { return value[a] < value[b]; });
        std::vector<Eigen::VectorXd> s2;
        std::vector<double> v2;
        for (Eigen::Index i : idx) {
            s2.push_back(simplex[i]);
            v2.push_back(value[i]);
        }
        simplex = std::move(s2);
        value = std::move(v2);
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        order();
        if (value[n] - value[0] < ftol * (std::abs(value[0]) + ftol)) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflected = centroid + (centroid - simplex[n]);
        const double fr = f(reflected);
        if (fr < value[0]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[n]);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[n] = expanded;
                value[n] = fe;
            } else {
                simplex[n] = reflected;
                value[n] = fr;
            }
        } else if (fr < value[n - 1]) {
            simplex[n] = reflected;
            value[n] = fr;
        } else {
            const Eigen::VectorXd contracted = centroid + 0.5 * (simplex[n] - centroid);
            const double fc = f(contracted);
            if (fc < value[n]) {
                simplex[n] = contracted;
                value[n] = fc;
            } else {
                for (Eigen::Index i = 1; i <= n; ++i) {
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
                    value[i] = f(simplex[i]);
                }
            }
        }
    }
    order();
    x = simplex[0];
    return value[0];
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * (i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(da * db);
}

}  // namespace

double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
    return pearson(ranks(xs), ranks(ys));
}

double spearman_pvalue_negative(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double observed = spearman_rho(xs, ys);
    std::vector<double> perm = ys;
    std::sort(perm.begin(), perm.end());
    long count = 0, total = 0;
    do {
        ++total;
        if (spearman_rho(xs, perm) <= observed + 1e-12) ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace oracle
