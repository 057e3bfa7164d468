#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "georeg/se2.hpp"

namespace georeg {

struct GpsFix {
    double t = 0.0;
    double easting = 0.0;
    double northing = 0.0;
    double nominal_sigma = 0.0;  // <= 0 means "use the filter default"
    bool sim_outlier = false;    // ground-truth tag set by the simulator, never serialized
};

struct OdomSample {
    double t = 0.0;
    double v = 0.0;      // forward velocity, m/s
    double omega = 0.0;  // yaw rate, rad/s
};

struct FilterState {
    double t = 0.0;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();     // x, y, theta
    Eigen::Matrix3d cov = Eigen::Matrix3d::Identity();

    Pose2 pose() const { return Pose2(mean(0), mean(1), mean(2)); }
};

struct GateDecision {
    GpsFix fix;
    double mahalanobis_sq = 0.0;
    double threshold = 0.0;
    bool accepted = false;
};

// Scaled unscented transform parameters.
struct UkfParams {
    double alpha = 1e-1;
    double beta = 2.0;
    double kappa = 0.0;
};

// Per-sample twist noise mapped additively into the state: the prediction adds
// diag(sigma_v^2, sigma_v^2, sigma_omega^2) * dt to the covariance.
struct ProcessNoise {
    double sigma_v = 0.1;       // m/s
    double sigma_omega = 0.02;  // rad/s
};

struct FilterConfig {
    UkfParams ut;
    ProcessNoise process;
    double default_gps_sigma = 5.0;  // m, used when a fix carries no sigma
    double gate_confidence = 0.95;
};

// Quantile of the chi-square distribution with `dof` degrees of freedom,
// found by numeric inversion of the regularized incomplete gamma CDF.
double chi_square_quantile(int dof, double p);

// Midpoint-heading unicycle step used by both the filter and the simulator:
//   x' = x + v dt cos(theta + omega dt / 2)
//   y' = y + v dt sin(theta + omega dt / 2)
//   theta' = theta + omega dt
Pose2 unicycle_step(const Pose2& p, double v, double omega, double dt);

// Unscented prediction through the unicycle model. dt must be >= 0.
FilterState predict(const FilterState& state, const OdomSample& u, double dt,
                    const ProcessNoise& q, const UkfParams& params = {});

// GPS position update with chi-square innovation gating. A rejected fix
// leaves the returned state identical to the input.
std::pair<FilterState, GateDecision> update(const FilterState& state, const GpsFix& fix,
                                            double gate_confidence,
                                            const UkfParams& params = {},
                                            double default_sigma = 5.0);

struct FilterRun {
    std::vector<std::pair<double, Pose2>> path;  // one entry per odometry sample
    std::vector<GateDecision> decisions;         // one entry per GPS fix
};

// Event-driven merge of the two time-sorted streams. Each odometry sample is
// treated as the twist held from its timestamp until the next one, so a GPS
// fix between samples is predicted to with the twist currently in effect.
// Ties at equal timestamps process odometry first.
FilterRun run_filter(const std::vector<OdomSample>& odom, const std::vector<GpsFix>& gps,
                     const FilterState& init, const FilterConfig& config = {});

}  // namespace georeg
