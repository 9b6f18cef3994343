#pragma once

#include <cstdint>
#include <vector>

#include "ssc/kitti_io.hpp"
#include "ssc/projection.hpp"
#include "ssc/semantics.hpp"

namespace ssc {

/// Structure counts and extent of a generated urban-like scene.
struct SceneSpec {
    int walls = 8;
    int trunks = 12;
    int poles = 6;
    int signs = 4;
    double ground_density = 0.5;  ///< road points per square meter
    int vegetation = 5;
    int cars = 3;
    double extent = 60.0;  ///< meters; structures sit within ~0.45 * extent
    std::uint64_t seed = 1;
};

/// Deterministic under its seed. Buildings are vertical point-sampled
/// rectangles, trunks and poles thin vertical cylinders, signs small
/// high-priority clusters, ground a z ~ 0 disc, vegetation ellipsoid blobs.
LabeledCloud generate_scene(const SceneSpec& spec);

/// Planted rigid transform plus measurement corruption.
struct OracleTransform {
    double dx = 0.0;
    double dy = 0.0;
    double theta_deg = 0.0;
    double noise_sigma = 0.0;   ///< meters, isotropic Gaussian per axis
    double dropout_rate = 0.0;  ///< in [0, 1)
};

/// Rotates by theta about z, translates, adds Gaussian noise, then drops each
/// point independently. Deterministic under the seed.
LabeledCloud apply_transform(const LabeledCloud& cloud, const OracleTransform& t,
                             std::uint64_t seed);

struct OracleTranslation {
    double dx = 0.0;
    double dy = 0.0;
    double loss = 0.0;
};

/// Brute-force reference for the windowed ICP: exhaustively minimizes the
/// label-gated quadratic loss over the (dx, dy) grid [-bound, bound]^2,
/// recomputing full (non-windowed) equal-label nearest-neighbor
/// correspondences at every grid point. `shift` is accepted for interface
/// parity with semantic_icp and ignored, since the search is unwindowed.
OracleTranslation oracle_translation(const RingProjection& target,
                                     const RingProjection& rotated, int shift,
                                     double grid_step, double bound);

/// Evaluates the oracle's loss (full equal-label NN correspondences) at one
/// translation; used to compare optima on a common footing.
double oracle_loss_at(const RingProjection& target, const RingProjection& rotated,
                      double dx, double dy);

/// A sequence revisit: frame `later` re-observes frame `earlier`'s place at
/// a small planar offset and heading change.
struct PlantedLoop {
    int earlier = 0;
    int later = 0;
    double offset_x = 0.0;
    double offset_y = 0.0;
    double heading_offset_deg = 0.0;
};

/// Synthetic drive: frames are views of one shared world, spaced far enough
/// apart that non-planted pairs are unambiguous negatives.
struct SequenceSpec {
    int n_frames = 20;
    int grid_cols = 5;
    double spacing = 65.0;       ///< meters between neighboring frame sites
    double sensor_range = 60.0;  ///< crop radius per frame
    double sigma = 0.0;          ///< per-axis Gaussian noise
    std::uint64_t seed = 7;
    std::vector<PlantedLoop> loops = {
        {2, 15, 1.0, -0.5, 0.0},
        {5, 18, -0.8, 0.6, 180.0},
    };
};

struct SyntheticSequence {
    std::vector<LabeledCloud> frames;  ///< sensor-frame clouds
    std::vector<PoseSE3> poses;        ///< LiDAR-frame ground truth
};

SyntheticSequence generate_sequence(const SequenceSpec& spec);

}  // namespace ssc
