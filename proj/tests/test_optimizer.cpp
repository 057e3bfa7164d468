#include <doctest.h>

#include <cmath>

#include "georeg/graph.hpp"
#include "georeg/simulator.hpp"
#include "support/oracles.hpp"

using namespace georeg;

namespace {

// Pose chain with landmarks, generated near-consistent: measurements are the
// truth values plus small noise, estimates start at truth plus a small kick.
PoseGraph noisy_chain(std::uint64_t seed, int n_poses, int n_landmarks, bool gps_priors,
                      bool fix_first) {
    Rng rng(seed);
    std::vector<Pose2> truth;
    truth.emplace_back();
    for (int i = 1; i < n_poses; ++i)
        truth.push_back(compose(truth.back(),
                                Pose2(rng.uniform(1.0, 3.0), rng.uniform(-0.5, 0.5),
                                      rng.uniform(-0.6, 0.6))));
    std::vector<Point2> marks;
    for (int i = 0; i < n_landmarks; ++i)
        marks.emplace_back(rng.uniform(-5.0, 10.0), rng.uniform(-5.0, 10.0));

    PoseGraph g;
    for (int i = 0; i < n_poses; ++i) {
        const Pose2 kicked(truth[i].x + 0.05 * rng.gauss(), truth[i].y + 0.05 * rng.gauss(),
                           truth[i].theta + 0.02 * rng.gauss());
        g.add_pose(i, fix_first && i == 0 ? truth[i] : kicked, fix_first && i == 0);
    }
    for (int i = 0; i < n_landmarks; ++i)
        g.add_landmark(100 + i, Point2(marks[i].x + 0.05 * rng.gauss(),
                                       marks[i].y + 0.05 * rng.gauss()));

    Info3 odo_info = Info3::Zero();
    odo_info(0, 0) = odo_info(1, 1) = 25.0;
    odo_info(2, 2) = 100.0;
    for (int i = 0; i + 1 < n_poses; ++i) {
        Pose2 meas = compose(inverse(truth[i]), truth[i + 1]);
        meas = Pose2(meas.x + 0.02 * rng.gauss(), meas.y + 0.02 * rng.gauss(),
                     meas.theta + 0.01 * rng.gauss());
        g.add_edge(RelPoseEdge{i, i + 1, meas, odo_info});
    }
    Info2 obs_info = Info2::Identity() * 25.0;
    for (int l = 0; l < n_landmarks; ++l)
        for (int i = 0; i < n_poses; i += 2) {
            Point2 meas = inverse_transform_point(truth[i], marks[l]);
            meas.x += 0.02 * rng.gauss();
            meas.y += 0.02 * rng.gauss();
            g.add_edge(LandmarkObsEdge{i, 100 + l, meas, obs_info});
        }
    if (gps_priors) {
        Info2 gps_info = Info2::Identity() / 25.0;
        for (int i = 0; i < n_poses; i += 2)
            g.add_edge(GpsPriorEdge{i,
                                    Point2(truth[i].x + 0.5 * rng.gauss(),
                                           truth[i].y + 0.5 * rng.gauss()),
                                    gps_info});
    }
    return g;
}

double oracle_minimum(const PoseGraph& g, int restarts = 8) {
    Rng rng(4242);
    const Eigen::VectorXd x0 = oracle::get_free_params(g);
    auto cost = [&](const Eigen::VectorXd& x) { return oracle::chi2_at(g, x); };
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Eigen::VectorXd x = x0;
        for (Eigen::Index i = 0; r > 0 && i < x.size(); ++i) x(i) += 0.02 * rng.gauss();
        double value = oracle::nelder_mead(cost, x, 0.1);
        // polish with shrinking restarts from the found point
        for (double step : {1e-2, 1e-3, 1e-4})
            value = oracle::nelder_mead(cost, x, step);
        best = std::min(best, value);
    }
    return best;
}

}  // namespace

TEST_CASE("chain with one relpose edge solves exactly") {
    PoseGraph g;
    const Pose2 origin(0.5, -0.25, 0.3);
    const Pose2 meas(2.0, 1.0, 0.7);
    g.add_pose(0, origin, true);
    g.add_pose(1, Pose2(42.0, -17.0, 2.0));  // far-off start
    g.add_edge(RelPoseEdge{0, 1, meas, Info3::Identity()});

    const OptimizeReport report = optimize(g);
    CHECK(report.converged);
    CHECK(report.termination == Termination::tolerance);
    CHECK(report.final_chi2 < 1e-18);
    const Pose2 expect = compose(origin, meas);
    CHECK(g.pose(1).estimate.x == doctest::Approx(expect.x).epsilon(1e-9));
    CHECK(g.pose(1).estimate.y == doctest::Approx(expect.y).epsilon(1e-9));
    CHECK(g.pose(1).estimate.theta == doctest::Approx(expect.theta).epsilon(1e-9));
}

TEST_CASE("two equal gps priors average the translation") {
    PoseGraph g;
    g.add_pose(0, Pose2(), true);
    g.add_pose(1, Pose2(0.3, 0.4, 0.0));
    g.add_edge(GpsPriorEdge{1, Point2(0, 0), Info2::Identity()});
    g.add_edge(GpsPriorEdge{1, Point2(2, 0), Info2::Identity()});

    const OptimizeReport report = optimize(g);
    CHECK(report.converged);
    CHECK(g.pose(1).estimate.x == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(g.pose(1).estimate.y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(report.final_chi2 == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("underconstrained graphs are rejected before iterating") {
    PoseGraph g;
    g.add_pose(0, Pose2());
    g.add_pose(1, Pose2(1, 0, 0));
    g.add_edge(RelPoseEdge{0, 1, Pose2(1, 0, 0), Info3::Identity()});
    CHECK_THROWS_AS(optimize(g), StructureError);

    // disconnected free landmark
    PoseGraph g2;
    g2.add_pose(0, Pose2(), true);
    g2.add_landmark(100, Point2(1, 1));
    CHECK_THROWS_WITH_AS(optimize(g2), doctest::Contains("100"), StructureError);

    // prior edge makes its own component observable
    PoseGraph g3;
    g3.add_pose(0, Pose2(), true);
    g3.add_pose(1, Pose2(5, 5, 0));
    g3.add_edge(GpsPriorEdge{1, Point2(1, 1), Info2::Identity()});
    CHECK_NOTHROW(optimize(g3));
}

TEST_CASE("empty-ish graph edge cases") {
    PoseGraph g;
    CHECK_THROWS_AS(optimize(g), StructureError);

    PoseGraph only_fixed;
    only_fixed.add_pose(0, Pose2(1, 2, 3), true);
    const OptimizeReport report = optimize(only_fixed);
    CHECK(report.converged);
    CHECK(report.iterations == 0);
}

TEST_CASE("final chi2 matches the derivative-free oracle on random graphs") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        PoseGraph g = noisy_chain(seed, 5, 3, true, false);
        const double oracle_chi2 = oracle_minimum(g);
        const OptimizeReport report = optimize(g);
        CHECK(report.converged);
        CHECK(report.final_chi2 <= report.initial_chi2);
        CHECK(std::abs(report.final_chi2 - oracle_chi2) < 1e-6);
    }
}

TEST_CASE("accepted iterations never increase chi2") {
    PoseGraph g = noisy_chain(77, 6, 2, true, false);
    const OptimizeReport report = optimize(g);
    CHECK(report.final_chi2 <= report.initial_chi2);
    CHECK(report.converged);
    // running again from the solution changes nothing
    const double settled = g.chi2();
    const OptimizeReport again = optimize(g);
    CHECK(again.initial_chi2 == doctest::Approx(settled));
    CHECK(again.final_chi2 <= settled + 1e-12);
}

TEST_CASE("gauge invariance: rigidly moved initial guess reaches the same chi2") {
    PoseGraph a = noisy_chain(5, 6, 3, false, true);
    PoseGraph b = a;
    // rotate + translate every free estimate
    const Pose2 T(3.0, -2.0, 0.35);
    for (const auto& v : b.poses())
        if (!v.fixed) b.set_pose_estimate(v.id, compose(T, v.estimate));
    for (const auto& v : b.landmarks())
        b.set_landmark_estimate(v.id, transform_point(T, v.estimate));

    const OptimizeReport ra = optimize(a);
    const OptimizeReport rb = optimize(b);
    CHECK(ra.converged);
    CHECK(rb.converged);
    CHECK(std::abs(ra.final_chi2 - rb.final_chi2) < 1e-8 * std::max(1.0, ra.final_chi2));
}

TEST_CASE("anchor priors dominate as information grows") {
    PoseGraph base = noisy_chain(9, 5, 2, true, false);
    const VertexId lm = 100;
    const Point2 label(4.0, 2.0);

    double last_dist = std::numeric_limits<double>::infinity();
    for (const double sigma : {10.0, 1.0, 0.1, 0.01, 0.001}) {
        PoseGraph g = base;
        attach_anchor_priors(g, {{lm, label}}, sigma);
        optimize(g);
        const double dist = (g.landmark(lm).estimate - label).norm();
        CHECK(dist <= last_dist + 1e-9);
        last_dist = dist;
    }
    CHECK(last_dist < 1e-3);
}

TEST_CASE("anchoring every landmark with tight sigma pins them to the labels") {
    PoseGraph g = noisy_chain(21, 6, 3, true, false);
    std::vector<std::pair<VertexId, Point2>> labels;
    Rng rng(55);
    for (const auto& lm : g.landmarks())
        labels.emplace_back(lm.id, Point2(lm.estimate.x + 0.05 * rng.gauss(),
                                          lm.estimate.y + 0.05 * rng.gauss()));
    attach_anchor_priors(g, labels, 0.01);
    const double oracle_chi2 = oracle_minimum(g);
    const OptimizeReport report = optimize(g);
    CHECK(report.converged);
    CHECK(std::abs(report.final_chi2 - oracle_chi2) < 1e-4 * std::max(1.0, oracle_chi2));
    for (const auto& [id, label] : labels)
        CHECK((g.landmark(id).estimate - label).norm() < 1e-3);
}

TEST_CASE("optimize is deterministic") {
    PoseGraph a = noisy_chain(33, 6, 3, true, false);
    PoseGraph b = a;
    optimize(a);
    optimize(b);
    CHECK(a.content_hash() == b.content_hash());
}
