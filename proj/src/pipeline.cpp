#include "ssc/pipeline.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ssc/errors.hpp"
#include "ssc/projection.hpp"

namespace ssc {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

using Clock = std::chrono::steady_clock;

double us_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

SscDescriptor describe(const LabeledCloud& cloud, const MatchParams& params,
                       const AblationConfig& ablation) {
    return ablation.use_semantic_encoding ? encode(cloud, params.ssc, params.priority)
                                          : encode_max_height(cloud, params.ssc);
}

/// Best cyclic column shift in the same convention as compute_yaw: shift j
/// compares s1(i, k) against s2(i, (k + j) mod ns). Ties break low.
std::pair<int, double> best_column_shift(const SscDescriptor& s1, const SscDescriptor& s2) {
    const int ns = s1.sectors();
    const int nr = s1.rings();
    int best_shift = 0;
    double best_score = -1.0;
    for (int shift = 0; shift < ns; ++shift) {
        long matching = 0, occupied = 0;
        for (int i = 0; i < nr; ++i) {
            for (int k = 0; k < ns; ++k) {
                const std::uint8_t a = s1.cell(i, k);
                const std::uint8_t b = s2.cell(i, (k + shift) % ns);
                if (a == 0 && b == 0) continue;
                ++occupied;
                if (a == b) ++matching;
            }
        }
        const double score = occupied > 0 ? static_cast<double>(matching) / occupied : 0.0;
        if (score > best_score) {
            best_score = score;
            best_shift = shift;
        }
    }
    return {best_shift, best_score};
}

}  // namespace

LabeledCloud align_cloud(const LabeledCloud& cloud, const RelativePose& pose) {
    const double c = std::cos(pose.theta_deg * kDegToRad);
    const double s = std::sin(pose.theta_deg * kDegToRad);
    LabeledCloud out;
    out.frame_id = cloud.frame_id;
    out.points.reserve(cloud.points.size());
    for (const auto& p : cloud.points) {
        SemanticPoint q;
        q.x = c * p.x - s * p.y + pose.dx;
        q.y = s * p.x + c * p.y + pose.dy;
        q.z = p.z;
        q.label = p.label;
        out.points.push_back(q);
    }
    return out;
}

MatchResult match_pair(const LabeledCloud& cloud_a, const LabeledCloud& cloud_b,
                       const MatchParams& params, const AblationConfig& ablation) {
    params.sicp.validate();
    params.ssc.validate();
    MatchResult res;

    if (ablation.use_yaw_align) {
        if (ablation.use_icp) {
            TwoStepTimings split;
            auto t0 = Clock::now();
            try {
                res.pose = estimate_relative_pose(cloud_a, cloud_b, params.sicp, &split);
            } catch (const Error& e) {
                res.timings.yaw_us = us_since(t0);
                res.diagnostic = e.what();
                return res;
            }
            res.timings.yaw_us = split.yaw_us;
            res.timings.icp_us = split.icp_us;
        } else {
            // Translation dropped: keep the yaw alignment only.
            auto t0 = Clock::now();
            try {
                const RingProjection ring_a =
                    build_ring(filter_representative(cloud_a), params.sicp.na);
                const RingProjection ring_b =
                    build_ring(filter_representative(cloud_b), params.sicp.na);
                const YawEstimate yaw = compute_yaw(ring_a, ring_b);
                res.pose.theta_deg = yaw.theta_deg;
                res.pose.yaw_residual = yaw.residual;
            } catch (const Error& e) {
                res.timings.yaw_us = us_since(t0);
                res.diagnostic = e.what();
                return res;
            }
            res.timings.yaw_us = us_since(t0);
        }

        auto t2 = Clock::now();
        const LabeledCloud aligned_b = align_cloud(cloud_b, res.pose);
        const SscDescriptor s1 = describe(cloud_a, params, ablation);
        const SscDescriptor s2 = describe(aligned_b, params, ablation);
        res.timings.describe_us = us_since(t2);

        auto t3 = Clock::now();
        const SimilarityDetail detail = similarity_detail(s1, s2);
        res.timings.retrieve_us = us_since(t3);
        res.score = detail.score;
        if (detail.occupied == 0) res.diagnostic = "empty descriptors";
        return res;
    }

    // Scan-context fallback: the yaw comes from the best-scoring descriptor
    // column shift and the score stays a maximum over all column shifts.
    auto t0 = Clock::now();
    const SscDescriptor s1 = describe(cloud_a, params, ablation);
    SscDescriptor s2 = describe(cloud_b, params, ablation);
    res.timings.describe_us = us_since(t0);

    auto t1 = Clock::now();
    auto [shift, score] = best_column_shift(s1, s2);
    res.timings.yaw_us = us_since(t1);
    res.pose.theta_deg = wrap_degrees(360.0 - 360.0 * shift / params.ssc.ns);

    if (ablation.use_icp) {
        auto t2 = Clock::now();
        try {
            const RingProjection ring_a = build_ring(filter_representative(cloud_a), params.sicp.na);
            const RingProjection ring_b = build_ring(filter_representative(cloud_b), params.sicp.na);
            const int ring_shift =
                static_cast<int>(std::llround(static_cast<double>(shift) * params.sicp.na /
                                              params.ssc.ns)) %
                params.sicp.na;
            const RingProjection aligned = rotate_ring(ring_b, res.pose.theta_deg);
            const IcpResult icp = semantic_icp(ring_a, aligned, ring_shift, params.sicp);
            res.pose.dx = icp.dx;
            res.pose.dy = icp.dy;
            res.pose.icp_loss = icp.loss;
        } catch (const Error& e) {
            res.timings.icp_us = us_since(t2);
            res.diagnostic = e.what();
            res.score = 0.0;
            return res;
        }
        res.timings.icp_us = us_since(t2);

        auto t3 = Clock::now();
        const LabeledCloud aligned_b = align_cloud(cloud_b, res.pose);
        s2 = describe(aligned_b, params, ablation);
        res.timings.describe_us += us_since(t3);

        auto t4 = Clock::now();
        std::tie(shift, score) = best_column_shift(s1, s2);
        res.timings.retrieve_us = us_since(t4);
    }

    res.score = score;
    if (s1.nonzero_count() == 0 && s2.nonzero_count() == 0) {
        res.score = 0.0;
        res.diagnostic = "empty descriptors";
    }
    return res;
}

std::string match_result_json(const MatchResult& result, int frame_a, int frame_b) {
    nlohmann::json j;
    j["frame_a"] = frame_a;
    j["frame_b"] = frame_b;
    j["score"] = result.score;
    j["pose"] = {{"dx", result.pose.dx},
                 {"dy", result.pose.dy},
                 {"theta_deg", result.pose.theta_deg},
                 {"yaw_residual", result.pose.yaw_residual},
                 {"icp_loss", result.pose.icp_loss}};
    j["timings_us"] = {{"yaw", result.timings.yaw_us},
                       {"icp", result.timings.icp_us},
                       {"describe", result.timings.describe_us},
                       {"retrieve", result.timings.retrieve_us}};
    j["diagnostic"] = result.diagnostic;
    return j.dump();
}

}  // namespace ssc
