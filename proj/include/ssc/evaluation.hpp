#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "ssc/kitti_io.hpp"
#include "ssc/pipeline.hpp"

namespace ssc {

/// A sampled evaluation pair: positive when the ground-truth planar distance
/// is under 3 m, negative when it exceeds 20 m.
struct LabeledPair {
    int i = 0;
    int j = 0;  ///< i < j
    bool is_positive = false;
    RelativePose gt_pose;
};

inline constexpr double kPositiveDistance = 3.0;
inline constexpr double kNegativeDistance = 20.0;

/// Relative planar pose of frame j in frame i's coordinates, from Eq.-style
/// composition T = Ti^-1 * Tj; pitch and roll are dropped.
RelativePose gt_relative_pose(const PoseSE3& t1, const PoseSE3& t2);

/// Enumerates every positive pair (planar distance < 3 m, frame gap >=
/// min_gap), then draws floor(alpha * Np) negatives (distance > 20 m)
/// uniformly without replacement with the seeded generator. Pairs between
/// 3 m and 20 m never appear. Throws EmptyPositivesError when no positive
/// exists; warns on stderr and takes all negatives when fewer than requested
/// are available.
std::vector<LabeledPair> sample_pairs(const std::vector<PoseSE3>& poses, double alpha,
                                      std::uint64_t seed, int min_gap = 100);

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
};

/// Exact precision-recall curve over the distinct observed scores, sorted by
/// descending threshold (a pair is predicted positive when score >=
/// threshold). Throws Error unless both label classes are present.
std::vector<PrPoint> pr_curve(const std::vector<double>& scores,
                              const std::vector<bool>& labels);

double f1_max(const std::vector<PrPoint>& curve);
/// Threshold that attains f1_max.
double f1_max_threshold(const std::vector<PrPoint>& curve);

/// (precision at minimum recall + max recall at 100% precision) / 2.
double extended_precision(const std::vector<PrPoint>& curve);

struct PosePair {
    RelativePose estimate;
    RelativePose ground_truth;
};

struct PoseErrorStats {
    double mean_yaw_error_deg = 0.0;
    double mean_translation_error_m = 0.0;
    std::size_t count = 0;
};

/// Mean absolute wrapped yaw error and mean planar translation error.
/// Throws Error on empty input.
PoseErrorStats pose_error_stats(const std::vector<PosePair>& pairs);

struct PairOutcome {
    LabeledPair pair;
    MatchResult result;
};

struct EvalReport {
    std::size_t n_positive = 0;
    std::size_t n_negative = 0;
    std::vector<PrPoint> curve;
    double f1_max = 0.0;
    double f1_threshold = 0.0;
    double extended_precision = 0.0;
    PoseErrorStats pose_errors;  ///< over true positives at the pose threshold
    double pose_threshold = 0.0;
    StageTimings mean_timings_us;
};

/// Aggregates scored pairs into the report. Pose errors are measured on true
/// positives at `pose_threshold` (defaults to the F1-max threshold when NaN).
EvalReport build_report(const std::vector<PairOutcome>& outcomes,
                        double pose_threshold = std::numeric_limits<double>::quiet_NaN());

struct EvalConfig {
    double alpha = 100.0;
    std::uint64_t seed = 13;
    int min_gap = 100;
    int workers = 0;  ///< 0 = hardware concurrency
    MatchParams match;
    AblationConfig ablation;
};

using FrameProvider = std::function<std::shared_ptr<const LabeledCloud>(int)>;

struct EvalRun {
    std::vector<PairOutcome> outcomes;
    EvalReport report;
};

/// Samples pairs from the poses, scores each with match_pair (fanning out
/// across workers; the provider must be thread safe), and builds the report.
EvalRun run_evaluation(const FrameProvider& frames, const std::vector<PoseSE3>& poses,
                       const EvalConfig& config);

/// Writes report.json, pr_curve.csv, pose_errors.csv, timings.csv and
/// matches.jsonl under `dir`.
void write_report(const std::filesystem::path& dir, const EvalRun& run);

}  // namespace ssc
