#include "ssc/global_sicp.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ssc/errors.hpp"

namespace ssc {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

double wrap_degrees(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w > 180.0) w -= 360.0;
    if (w <= -180.0) w += 360.0;
    return w;
}

RelativePose RelativePose::inverse() const {
    const double c = std::cos(-theta_deg * kDegToRad);
    const double s = std::sin(-theta_deg * kDegToRad);
    RelativePose inv;
    inv.theta_deg = wrap_degrees(-theta_deg);
    inv.dx = -(c * dx - s * dy);
    inv.dy = -(s * dx + c * dy);
    inv.yaw_residual = yaw_residual;
    inv.icp_loss = icp_loss;
    return inv;
}

YawEstimate compute_yaw(const RingProjection& ring1, const RingProjection& ring2) {
    const int na = ring1.size();
    if (ring2.size() != na)
        throw ShapeError("compute_yaw: rings differ in sector count");
    if (na == 0) throw NoOverlapError("compute_yaw: empty rings");

    double best = std::numeric_limits<double>::infinity();
    int best_shift = -1;
    for (int shift = 0; shift < na; ++shift) {
        double sum = 0.0;
        int joint = 0;
        for (int k = 0; k < na; ++k) {
            const RingSlot& a = ring1.slots[static_cast<std::size_t>(k)];
            const RingSlot& b = ring2.slots[static_cast<std::size_t>((k + shift) % na)];
            if (a.occupied && b.occupied) {
                sum += std::abs(a.r - b.r);
                ++joint;
            }
        }
        if (joint == 0) continue;
        const double psi = sum / joint;
        if (psi < best) {
            best = psi;
            best_shift = shift;
        }
    }
    if (best_shift < 0)
        throw NoOverlapError("compute_yaw: no cyclic shift has a jointly occupied slot");

    YawEstimate est;
    est.shift = best_shift;
    est.theta_deg = wrap_degrees(360.0 - 360.0 * best_shift / na);
    est.residual = best;
    return est;
}

RingProjection rotate_ring(const RingProjection& ring, double theta_deg) {
    const double c = std::cos(theta_deg * kDegToRad);
    const double s = std::sin(theta_deg * kDegToRad);
    RingProjection out = ring;
    for (RingSlot& slot : out.slots) {
        if (!slot.occupied) continue;
        const double x = slot.x;
        const double y = slot.y;
        slot.x = x * c - y * s;
        slot.y = x * s + y * c;
    }
    return out;
}

IcpResult semantic_icp(const RingProjection& target, const RingProjection& rotated,
                       int shift, const SicpParams& params) {
    params.validate();
    const int na = target.size();
    if (rotated.size() != na)
        throw ShapeError("semantic_icp: rings differ in sector count");

    struct Source {
        double x, y;
        SemanticClass label;
        int slot;
    };
    std::vector<Source> sources;
    sources.reserve(static_cast<std::size_t>(na));
    for (int i = 0; i < na; ++i) {
        const RingSlot& s = rotated.slots[static_cast<std::size_t>(i)];
        if (s.occupied) sources.push_back({s.x, s.y, s.label, i});
    }

    const int half = params.nl / 2;
    IcpResult res;
    std::vector<std::pair<double, double>> matched;  // correspondent coordinates
    matched.resize(sources.size());
    std::vector<bool> has_match(sources.size(), false);

    for (int iter = 1; iter <= params.max_iters; ++iter) {
        double sum_x = 0.0, sum_y = 0.0;
        int count = 0;
        for (std::size_t si = 0; si < sources.size(); ++si) {
            const Source& src = sources[si];
            const double px = src.x + res.dx;
            const double py = src.y + res.dy;
            // The yaw alignment moved slot content by (na - shift) sectors,
            // so the correspondent of rotated slot i sits near target slot
            // i + (na - shift).
            const int center = (src.slot + na - shift) % na;
            double best_d2 = std::numeric_limits<double>::infinity();
            double bx = 0.0, by = 0.0;
            bool found = false;
            for (int w = -half; w <= half; ++w) {
                const int j = ((center + w) % na + na) % na;
                const RingSlot& t = target.slots[static_cast<std::size_t>(j)];
                if (!t.occupied || t.label != src.label) continue;
                const double ddx = t.x - px;
                const double ddy = t.y - py;
                const double d2 = ddx * ddx + ddy * ddy;
                if (d2 < best_d2) {
                    best_d2 = d2;
                    bx = t.x;
                    by = t.y;
                    found = true;
                }
            }
            has_match[si] = found;
            if (!found) continue;
            matched[si] = {bx, by};
            sum_x += bx - px;
            sum_y += by - py;
            ++count;
        }
        if (count == 0)
            throw NoCorrespondenceError(
                "semantic_icp: no label-matched correspondence at iteration " +
                    std::to_string(iter),
                iter);

        const double ux = sum_x / count;
        const double uy = sum_y / count;
        res.dx += ux;
        res.dy += uy;
        res.iterations = iter;

        double loss = 0.0;
        for (std::size_t si = 0; si < sources.size(); ++si) {
            if (!has_match[si]) continue;
            const double ex = sources[si].x + res.dx - matched[si].first;
            const double ey = sources[si].y + res.dy - matched[si].second;
            loss += 0.5 * (ex * ex + ey * ey);
        }
        res.loss = loss;

        if (std::hypot(ux, uy) < params.converge_eps) break;
    }
    return res;
}

namespace {

RelativePose two_step(const RingProjection& ring_a, const RingProjection& ring_b,
                      const SicpParams& params) {
    const YawEstimate yaw = compute_yaw(ring_a, ring_b);
    const RingProjection aligned = rotate_ring(ring_b, yaw.theta_deg);
    const IcpResult icp = semantic_icp(ring_a, aligned, yaw.shift, params);
    RelativePose pose;
    pose.dx = icp.dx;
    pose.dy = icp.dy;
    pose.theta_deg = yaw.theta_deg;
    pose.yaw_residual = yaw.residual;
    pose.icp_loss = icp.loss;
    return pose;
}

/// Ring projection of the filtered cloud moved by the pose, without
/// materializing the transformed copy.
RingProjection build_ring_transformed(const LabeledCloud& filtered, const RelativePose& pose,
                                      int na) {
    const double c = std::cos(pose.theta_deg * kDegToRad);
    const double s = std::sin(pose.theta_deg * kDegToRad);
    RingProjection ring;
    ring.slots.resize(static_cast<std::size_t>(na));
    const double scale = na / (2.0 * std::numbers::pi);
    for (const auto& p : filtered.points) {
        const double x = c * p.x - s * p.y + pose.dx;
        const double y = s * p.x + c * p.y + pose.dy;
        if (x == 0.0 && y == 0.0) continue;
        const double r = std::hypot(x, y);
        double phi = std::atan2(y, x);
        if (phi >= std::numbers::pi) phi = -std::numbers::pi;
        int k = static_cast<int>(std::floor((phi + std::numbers::pi) * scale));
        k = std::clamp(k, 0, na - 1);
        RingSlot& slot = ring.slots[static_cast<std::size_t>(k)];
        if (!slot.occupied || r < slot.r) {
            slot.occupied = true;
            slot.r = r;
            slot.x = x;
            slot.y = y;
            slot.label = p.label;
        }
    }
    return ring;
}

}  // namespace

RelativePose estimate_relative_pose(const LabeledCloud& cloud_a, const LabeledCloud& cloud_b,
                                    const SicpParams& params, TwoStepTimings* timings) {
    params.validate();
    using Clock = std::chrono::steady_clock;
    auto tick = [t = Clock::now()]() mutable {
        const auto now = Clock::now();
        const double us = std::chrono::duration<double, std::micro>(now - t).count();
        t = now;
        return us;
    };

    const RingProjection ring_a = build_ring(filter_representative(cloud_a), params.na);
    const LabeledCloud filtered_b = filter_representative(cloud_b);
    const RingProjection ring_b = build_ring(filtered_b, params.na);

    TwoStepTimings local;
    YawEstimate yaw = compute_yaw(ring_a, ring_b);
    local.yaw_us += tick();
    IcpResult icp = semantic_icp(ring_a, rotate_ring(ring_b, yaw.theta_deg), yaw.shift, params);
    local.icp_us += tick();

    RelativePose pose;
    pose.dx = icp.dx;
    pose.dy = icp.dy;
    pose.theta_deg = yaw.theta_deg;
    pose.yaw_residual = yaw.residual;
    pose.icp_loss = icp.loss;

    for (int pass = 0; pass < params.refine_passes; ++pass) {
        // Re-run the two-step on the aligned ring: the residual problem has
        // near-zero translation, so the yaw argmin is no longer skewed.
        try {
            tick();
            const RingProjection aligned_b = build_ring_transformed(filtered_b, pose, params.na);
            yaw = compute_yaw(ring_a, aligned_b);
            local.yaw_us += tick();
            icp = semantic_icp(ring_a, rotate_ring(aligned_b, yaw.theta_deg), yaw.shift, params);
            local.icp_us += tick();
        } catch (const Error&) {
            break;  // keep the last consistent estimate
        }
        const double c = std::cos(yaw.theta_deg * kDegToRad);
        const double s = std::sin(yaw.theta_deg * kDegToRad);
        RelativePose refined;
        refined.theta_deg = wrap_degrees(pose.theta_deg + yaw.theta_deg);
        refined.dx = c * pose.dx - s * pose.dy + icp.dx;
        refined.dy = s * pose.dx + c * pose.dy + icp.dy;
        refined.yaw_residual = yaw.residual;
        refined.icp_loss = icp.loss;
        pose = refined;
    }
    if (timings) *timings = local;
    return pose;
}

}  // namespace ssc
