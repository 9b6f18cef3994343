#pragma once

#include <string>

#include "ssc/descriptor.hpp"
#include "ssc/global_sicp.hpp"
#include "ssc/semantics.hpp"

namespace ssc {

/// Component switches mirroring the ablation study: yaw pre-alignment,
/// translation correction, and semantic (vs. max-height) encoding.
struct AblationConfig {
    bool use_yaw_align = true;
    bool use_icp = true;
    bool use_semantic_encoding = true;
};

struct MatchParams {
    SicpParams sicp;
    SscParams ssc;
    PriorityTable priority = PriorityTable::default_priority();
};

struct StageTimings {
    double yaw_us = 0.0;       ///< filter + rings + cyclic yaw search
    double icp_us = 0.0;       ///< ring rotation + windowed ICP
    double describe_us = 0.0;  ///< alignment + both encodings
    double retrieve_us = 0.0;  ///< similarity scoring
};

struct MatchResult {
    double score = 0.0;
    RelativePose pose;
    StageTimings timings;
    std::string diagnostic;  ///< empty on a clean match

    bool ok() const { return diagnostic.empty(); }
};

/// Applies the planar pose: rotation by theta, then translation. z and
/// labels are untouched.
LabeledCloud align_cloud(const LabeledCloud& cloud, const RelativePose& pose);

/// Full pair pipeline: estimate the relative pose, align the second cloud,
/// encode both, score. Pose-estimation failures (no semantic overlap) yield
/// score 0 with a diagnostic instead of an error. Ablations:
///  - use_icp off: dx = dy = 0, yaw alignment only;
///  - use_yaw_align off: yaw from the best descriptor column shift and the
///    score is the maximum over all column shifts;
///  - use_semantic_encoding off: max-height blocks compared by z bin.
MatchResult match_pair(const LabeledCloud& cloud_a, const LabeledCloud& cloud_b,
                       const MatchParams& params, const AblationConfig& ablation = {});

/// One JSON object per line: frame ids, score, pose, timings, diagnostic.
std::string match_result_json(const MatchResult& result, int frame_a, int frame_b);

}  // namespace ssc
