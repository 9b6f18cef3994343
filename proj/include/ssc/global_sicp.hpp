#pragma once

#include "ssc/projection.hpp"

namespace ssc {

/// Result of the cyclic yaw search between two rings.
struct YawEstimate {
    int shift = 0;           ///< minimizing cyclic shift, in [0, na)
    double theta_deg = 0.0;  ///< 360 - 360*shift/na, wrapped into (-180, 180]
    double residual = 0.0;   ///< mean L1 radius distance over jointly occupied slots
};

/// Planar rigid transform mapping the second cloud into the first one's
/// frame: p1 ~= R(theta) * p2 + (dx, dy).
struct RelativePose {
    double dx = 0.0;
    double dy = 0.0;
    double theta_deg = 0.0;
    double yaw_residual = 0.0;  ///< diagnostic, see YawEstimate::residual
    double icp_loss = 0.0;      ///< diagnostic, final quadratic loss

    RelativePose inverse() const;
};

struct IcpResult {
    double dx = 0.0;
    double dy = 0.0;
    double loss = 0.0;
    int iterations = 0;
};

/// Wraps an angle in degrees into (-180, 180].
double wrap_degrees(double deg);

/// Evaluates the mean L1 radius distance for every cyclic shift i, where the
/// shifted ring reads ring2[(k + i) mod na], over slots occupied in both
/// rings. Shifts with zero jointly occupied slots score +inf. Returns the
/// minimizing shift (ties break toward the smallest index).
/// Throws NoOverlapError when every shift is empty.
YawEstimate compute_yaw(const RingProjection& ring1, const RingProjection& ring2);

/// Rotates every occupied slot's planar point by theta_deg about z. Slots are
/// not re-bucketed and stored radii are untouched.
RingProjection rotate_ring(const RingProjection& ring, double theta_deg);

/// Windowed label-gated planar ICP between a yaw-aligned ring and its target.
/// For each occupied slot of `rotated`, candidate correspondents are the
/// occupied target slots within nl/2 of the slot position the yaw alignment
/// predicts (slot offset na - shift), and only equal-label candidates count.
/// Each iteration applies the closed-form minimizer of the quadratic loss
/// (the mean residual) and stops once the update norm drops under
/// converge_eps or max_iters is reached.
/// Throws NoCorrespondenceError when an iteration matches nothing.
IcpResult semantic_icp(const RingProjection& target, const RingProjection& rotated,
                       int shift, const SicpParams& params);

struct TwoStepTimings {
    double yaw_us = 0.0;  ///< ring projections + cyclic yaw searches
    double icp_us = 0.0;  ///< ring rotations + windowed ICP passes
};

/// Full two-step estimate: representative filter, ring projection, cyclic
/// yaw search, ring rotation, then windowed semantic ICP, repeated
/// refine_passes more times on the aligned cloud.
RelativePose estimate_relative_pose(const LabeledCloud& cloud_a, const LabeledCloud& cloud_b,
                                    const SicpParams& params = {},
                                    TwoStepTimings* timings = nullptr);

}  // namespace ssc
