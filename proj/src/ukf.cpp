#include "georeg/ukf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "georeg/errors.hpp"

namespace georeg {

namespace {

// Regularized lower incomplete gamma P(a, x), series + continued fraction.
double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw NumericalError("gamma_p: invalid arguments");
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    // Lentz continued fraction for Q(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double chi_square_quantile(int dof, double p) {
    if (dof < 1) throw ConfigError("dof: must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("confidence: must be in (0, 1)");
    thread_local int cached_dof = -1;
    thread_local double cached_p = -1.0;
    thread_local double cached_q = 0.0;
    if (dof == cached_dof && p == cached_p) return cached_q;
    const double a = 0.5 * dof;
    // Bracket then bisect; the CDF is monotone.
    double lo = 0.0;
    double hi = std::max(4.0 * dof, 16.0);
    while (gamma_p(a, 0.5 * hi) < p) {
        hi *= 2.0;
        if (hi > 1e12) throw NumericalError("chi_square_quantile: bracket failed");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_p(a, 0.5 * mid) < p) lo = mid; else hi = mid;
        if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
    }
    cached_dof = dof;
    cached_p = p;
    cached_q = 0.5 * (lo + hi);
    return cached_q;
}

Pose2 unicycle_step(const Pose2& p, double v, double omega, double dt) {
    const double mid = p.theta + 0.5 * omega * dt;
    return Pose2(p.x + v * dt * std::cos(mid),
                 p.y + v * dt * std::sin(mid),
                 p.theta + omega * dt);
}

namespace {

struct SigmaPoints {
    std::array<Eigen::Vector3d, 7> points;
    std::array<double, 7> wm;
    std::array<double, 7> wc;
};

SigmaPoints make_sigma_points(const Eigen::Vector3d& mean, const Eigen::Matrix3d& cov,
                              const UkfParams& p) {
    constexpr int n = 3;
    const double lambda = p.alpha * p.alpha * (n + p.kappa) - n;
    const double scale = n + lambda;
    if (scale <= 0.0) throw ConfigError("alpha/kappa: scaled spread must be positive");
    Eigen::LLT<Eigen::Matrix3d> llt(scale * cov);
    if (llt.info() != Eigen::Success)
        throw NumericalError("sigma points: covariance is not positive definite");
    const Eigen::Matrix3d L = llt.matrixL();

    SigmaPoints sp;
    sp.points[0] = mean;
    for (int i = 0; i < n; ++i) {
        sp.points[1 + i] = mean + L.col(i);
        sp.points[1 + n + i] = mean - L.col(i);
    }
    sp.wm[0] = lambda / scale;
    sp.wc[0] = sp.wm[0] + (1.0 - p.alpha * p.alpha + p.beta);
    for (int i = 1; i < 2 * n + 1; ++i) sp.wm[i] = sp.wc[i] = 0.5 / scale;
    return sp;
}

// Weighted mean with the heading component averaged relative to the first
// point, so sigma points straddling +-pi do not cancel.
Eigen::Vector3d weighted_mean(const SigmaPoints& sp) {
    const double ref = sp.points[0](2);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    double dtheta = 0.0;
    for (int i = 0; i < 7; ++i) {
        mean(0) += sp.wm[i] * sp.points[i](0);
        mean(1) += sp.wm[i] * sp.points[i](1);
        dtheta += sp.wm[i] * normalize_angle(sp.points[i](2) - ref);
    }
    mean(2) = normalize_angle(ref + dtheta);
    return mean;
}

Eigen::Vector3d state_diff(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    return {a(0) - b(0), a(1) - b(1), normalize_angle(a(2) - b(2))};
}

}  // namespace

FilterState predict(const FilterState& state, const OdomSample& u, double dt,
                    const ProcessNoise& q, const UkfParams& params) {
    if (dt < 0.0) throw StructureError("predict: negative dt");
    if (dt == 0.0) return state;

    SigmaPoints sp = make_sigma_points(state.mean, state.cov, params);
    for (auto& pt : sp.points) {
        const Pose2 stepped = unicycle_step(Pose2(pt(0), pt(1), pt(2)), u.v, u.omega, dt);
        pt << stepped.x, stepped.y, stepped.theta;
    }

    FilterState out;
    out.t = state.t + dt;
    out.mean = weighted_mean(sp);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 7; ++i) {
        const Eigen::Vector3d d = state_diff(sp.points[i], out.mean);
        cov += sp.wc[i] * d * d.transpose();
    }
    cov(0, 0) += q.sigma_v * q.sigma_v * dt;
    cov(1, 1) += q.sigma_v * q.sigma_v * dt;
    cov(2, 2) += q.sigma_omega * q.sigma_omega * dt;
    out.cov = 0.5 * (cov + cov.transpose());
    return out;
}

std::pair<FilterState, GateDecision> update(const FilterState& state, const GpsFix& fix,
                                            double gate_confidence, const UkfParams& params,
                                            double default_sigma) {
    if (!(gate_confidence > 0.0 && gate_confidence < 1.0))
        throw ConfigError("gate_confidence: must be in (0, 1)");
    const double sigma = fix.nominal_sigma > 0.0 ? fix.nominal_sigma : default_sigma;
    const Eigen::Matrix2d R = Eigen::Matrix2d::Identity() * sigma * sigma;

    const SigmaPoints sp = make_sigma_points(state.mean, state.cov, params);
    std::array<Eigen::Vector2d, 7> z;
    for (int i = 0; i < 7; ++i) z[i] = sp.points[i].head<2>();
    Eigen::Vector2d z_pred = Eigen::Vector2d::Zero();
    for (int i = 0; i < 7; ++i) z_pred += sp.wm[i] * z[i];
    Eigen::Matrix2d S = R;
    Eigen::Matrix<double, 3, 2> Pxz = Eigen::Matrix<double, 3, 2>::Zero();
    for (int i = 0; i < 7; ++i) {
        const Eigen::Vector2d dz = z[i] - z_pred;
        S += sp.wc[i] * dz * dz.transpose();
        Pxz += sp.wc[i] * state_diff(sp.points[i], state.mean) * dz.transpose();
    }

    Eigen::LLT<Eigen::Matrix2d> llt(S);
    if (llt.info() != Eigen::Success)
        throw NumericalError("update: innovation covariance is not invertible");

    const Eigen::Vector2d innovation(fix.easting - z_pred(0), fix.northing - z_pred(1));
    const double d2 = innovation.dot(llt.solve(innovation));
    const double threshold = chi_square_quantile(2, gate_confidence);

    GateDecision decision{fix, d2, threshold, d2 <= threshold};
    if (!decision.accepted) return {state, decision};

    const Eigen::Matrix<double, 3, 2> K = llt.solve(Pxz.transpose()).transpose();
    FilterState out;
    out.t = state.t;
    out.mean = state.mean + K * innovation;
    out.mean(2) = normalize_angle(out.mean(2));
    const Eigen::Matrix3d cov = state.cov - K * S * K.transpose();
    out.cov = 0.5 * (cov + cov.transpose());
    return {out, decision};
}

FilterRun run_filter(const std::vector<OdomSample>& odom, const std::vector<GpsFix>& gps,
                     const FilterState& init, const FilterConfig& config) {
    for (std::size_t i = 1; i < odom.size(); ++i)
        if (odom[i].t <= odom[i - 1].t)
            throw StructureError("odometry timestamps not strictly increasing at record " +
                                 std::to_string(i));
    for (std::size_t i = 1; i < gps.size(); ++i)
        if (gps[i].t <= gps[i - 1].t)
            throw StructureError("gps timestamps not strictly increasing at record " +
                                 std::to_string(i));

    FilterRun run;
    run.path.reserve(odom.size());
    run.decisions.reserve(gps.size());

    FilterState state = init;
    OdomSample held{init.t, 0.0, 0.0};  // twist in effect until the first sample

    auto advance_to = [&](double t, std::size_t at) {
        const double dt = t - state.t;
        if (dt < 0.0)
            throw StructureError("stream timestamp before filter state at record " +
                                 std::to_string(at));
        if (dt > 0.0) state = predict(state, held, dt, config.process, config.ut);
    };

    std::size_t oi = 0, gi = 0;
    while (oi < odom.size() || gi < gps.size()) {
        const bool take_odom =
            gi >= gps.size() || (oi < odom.size() && odom[oi].t <= gps[gi].t);
        if (take_odom) {
            advance_to(odom[oi].t, oi);
            held = odom[oi];
            run.path.emplace_back(state.t, state.pose());
            ++oi;
        } else {
            advance_to(gps[gi].t, gi);
            auto [next, decision] =
                update(state, gps[gi], config.gate_confidence, config.ut, config.default_gps_sigma);
            state = next;
            run.decisions.push_back(decision);
            ++gi;
        }
    }
    return run;
}

}  // namespace georeg
