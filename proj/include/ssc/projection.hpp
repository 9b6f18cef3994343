#pragma once

#include <vector>

#include "ssc/semantics.hpp"

namespace ssc {

/// Parameters of the two-step pose stage.
struct SicpParams {
    int na = 360;               ///< azimuth sectors of the ring projection
    int nl = 20;                ///< correspondence search window length (slots)
    int max_iters = 30;         ///< ICP iteration cap
    double converge_eps = 1e-3; ///< meters; stop when the update drops below
    /// Extra two-step passes on the aligned cloud. Translation skews the
    /// radial fit enough to pull the yaw argmin off by a few sectors; the
    /// follow-up passes run at near-zero offset where the argmin is sharp.
    int refine_passes = 2;

    void validate() const;
};

struct RingSlot {
    bool occupied = false;
    double r = 0.0;  ///< polar radius of the kept point, meters
    double x = 0.0;
    double y = 0.0;
    SemanticClass label = SemanticClass::kUnlabeled;
};

/// Azimuth-ordered reduction of a filtered cloud: per sector, the single
/// point with the smallest polar radius. Unoccupied sectors carry an
/// explicit flag instead of a sentinel radius.
struct RingProjection {
    std::vector<RingSlot> slots;

    int size() const { return static_cast<int>(slots.size()); }
    int occupied_count() const;
};

struct PolarPoint {
    double r = 0.0;
    double phi = 0.0;  ///< radians in [-pi, pi)
};

/// Classes kept for pose estimation: static, thin, view-stable structures.
const std::vector<SemanticClass>& default_representative_classes();

/// Keeps points whose class is in `keep`, preserving scan order.
LabeledCloud filter_representative(
    const LabeledCloud& cloud,
    const std::vector<SemanticClass>& keep = default_representative_classes());

/// Quadrant-aware Cartesian to polar conversion in the x-y plane.
/// Throws DegeneratePointError for the origin.
PolarPoint to_polar(double x, double y);

/// Buckets a representative-filtered cloud into `na` azimuth sectors and
/// keeps the minimum-radius point of each. Sector 0 starts at phi = -pi.
/// Points at the sensor origin are skipped (no polar angle).
RingProjection build_ring(const LabeledCloud& cloud, int na);

}  // namespace ssc
