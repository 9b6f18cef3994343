#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ssc/errors.hpp"
#include "ssc/global_sicp.hpp"
#include "ssc/synthetic.hpp"

using namespace ssc;

namespace {

constexpr double kPi = std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

/// A ring with chosen occupancy; radii random, coordinates derived from the
/// slot's center angle so r = |(x, y)| holds.
RingProjection random_ring(std::mt19937_64& rng, int na, double occupancy,
                           bool multi_label = true) {
    const SemanticClass classes[4] = {SemanticClass::kBuilding, SemanticClass::kTrunk,
                                      SemanticClass::kTrafficSign, SemanticClass::kPole};
    RingProjection ring;
    ring.slots.resize(static_cast<std::size_t>(na));
    for (int k = 0; k < na; ++k) {
        if (uniform(rng, 0.0, 1.0) >= occupancy) continue;
        const double phi = -kPi + (k + 0.5) * 2.0 * kPi / na;
        const double r = uniform(rng, 3.0, 40.0);
        RingSlot& s = ring.slots[static_cast<std::size_t>(k)];
        s.occupied = true;
        s.r = r;
        s.x = r * std::cos(phi);
        s.y = r * std::sin(phi);
        s.label = multi_label ? classes[rng() % 4] : SemanticClass::kBuilding;
    }
    return ring;
}

/// Moves slot content forward by m: out[(k + m) mod na] = in[k].
RingProjection cyclic_shift(const RingProjection& ring, int m) {
    const int na = ring.size();
    RingProjection out;
    out.slots.resize(static_cast<std::size_t>(na));
    for (int k = 0; k < na; ++k)
        out.slots[static_cast<std::size_t>((k + m) % na)] = ring.slots[static_cast<std::size_t>(k)];
    return out;
}

}  // namespace

TEST_CASE("compute_yaw on identical rings returns shift 0, theta 0, residual 0") {
    std::mt19937_64 rng(7);
    const RingProjection ring = random_ring(rng, 360, 0.7);
    const YawEstimate est = compute_yaw(ring, ring);
    CHECK(est.shift == 0);
    CHECK(est.theta_deg == doctest::Approx(0.0));
    CHECK(est.residual == doctest::Approx(0.0));
}

TEST_CASE("compute_yaw recovers an exact cyclic shift") {
    std::mt19937_64 rng(8);
    const RingProjection ring = random_ring(rng, 4, 1.1);  // fully occupied
    const YawEstimate est = compute_yaw(ring, cyclic_shift(ring, 3));
    CHECK(est.shift == 3);
    CHECK(est.theta_deg == doctest::Approx(90.0));  // 360 - 270
    CHECK(est.residual == doctest::Approx(0.0));
}

TEST_CASE("compute_yaw equals exhaustive enumeration on random rings") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const RingProjection a = random_ring(rng, 360, 0.5);
        const RingProjection b = random_ring(rng, 360, 0.5);
        if (a.occupied_count() == 0 || b.occupied_count() == 0) continue;
        const YawEstimate est = compute_yaw(a, b);
        const oracle::YawResult ref = oracle::naive_yaw(a, b);
        CHECK(est.shift == ref.shift);
        CHECK(est.residual == doctest::Approx(ref.psi));
    }
}

TEST_CASE("compute_yaw recovers any cyclic shift of a fully occupied ring") {
    std::mt19937_64 rng(10);
    const int na = 90;
    const RingProjection ring = random_ring(rng, na, 1.1);
    for (int m : {1, 13, 44, 45, 46, 89}) {
        const YawEstimate est = compute_yaw(ring, cyclic_shift(ring, m));
        CHECK(est.shift == m);
        CHECK(est.theta_deg == doctest::Approx(wrap_degrees(360.0 - 360.0 * m / na)));
    }
}

TEST_CASE("compute_yaw breaks ties toward the smallest shift") {
    RingProjection ring;
    ring.slots.resize(8);
    for (int k = 0; k < 8; ++k) {
        RingSlot& s = ring.slots[static_cast<std::size_t>(k)];
        s.occupied = true;
        s.r = 5.0;  // constant ring: every shift scores the same
        s.x = 5.0 * std::cos(-kPi + (k + 0.5) * kPi / 4);
        s.y = 5.0 * std::sin(-kPi + (k + 0.5) * kPi / 4);
        s.label = SemanticClass::kBuilding;
    }
    CHECK(compute_yaw(ring, ring).shift == 0);
}

TEST_CASE("compute_yaw throws without any jointly occupied shift") {
    std::mt19937_64 rng(11);
    const RingProjection full = random_ring(rng, 16, 0.8);
    RingProjection empty;
    empty.slots.resize(16);
    CHECK_THROWS_AS(compute_yaw(full, empty), NoOverlapError);
    CHECK_THROWS_AS(compute_yaw(empty, empty), NoOverlapError);
}

TEST_CASE("rotate_ring rotates coordinates in place") {
    std::mt19937_64 rng(12);
    const RingProjection ring = random_ring(rng, 60, 0.6);

    const RingProjection same = rotate_ring(ring, 0.0);
    for (int k = 0; k < 60; ++k) {
        CHECK(same.slots[k].occupied == ring.slots[k].occupied);
        if (ring.slots[k].occupied) {
            CHECK(same.slots[k].x == ring.slots[k].x);
            CHECK(same.slots[k].y == ring.slots[k].y);
        }
    }

    RingProjection one;
    one.slots.resize(4);
    one.slots[2] = {true, 1.0, 1.0, 0.0, SemanticClass::kPole};
    const RingProjection quarter = rotate_ring(one, 90.0);
    CHECK(quarter.slots[2].x == doctest::Approx(0.0));
    CHECK(quarter.slots[2].y == doctest::Approx(1.0));

    const RingProjection twice = rotate_ring(rotate_ring(ring, 180.0), 180.0);
    for (int k = 0; k < 60; ++k) {
        if (!ring.slots[k].occupied) continue;
        CHECK(twice.slots[k].x == doctest::Approx(ring.slots[k].x).epsilon(1e-9));
        CHECK(twice.slots[k].y == doctest::Approx(ring.slots[k].y).epsilon(1e-9));
        CHECK(twice.slots[k].r == ring.slots[k].r);  // radii untouched
    }
}

TEST_CASE("semantic_icp on identical rings returns zero translation and loss") {
    std::mt19937_64 rng(13);
    const RingProjection ring = random_ring(rng, 360, 0.7);
    const IcpResult res = semantic_icp(ring, ring, 0, SicpParams{});
    CHECK(res.dx == doctest::Approx(0.0));
    CHECK(res.dy == doctest::Approx(0.0));
    CHECK(res.loss == doctest::Approx(0.0));
}

TEST_CASE("semantic_icp recovers a pure translation on a dense ring") {
    std::mt19937_64 rng(14);
    const RingProjection rotated = random_ring(rng, 360, 1.1, /*multi_label=*/false);
    RingProjection target = rotated;
    for (auto& s : target.slots) {
        if (!s.occupied) continue;
        s.x += 1.0;
        s.r = std::hypot(s.x, s.y);
    }
    const IcpResult res = semantic_icp(target, rotated, 0, SicpParams{});
    CHECK(std::abs(res.dx - 1.0) <= 0.05);
    CHECK(std::abs(res.dy - 0.0) <= 0.05);
}

TEST_CASE("semantic_icp throws when labels gate out every correspondence") {
    std::mt19937_64 rng(15);
    const RingProjection a = random_ring(rng, 60, 0.9, /*multi_label=*/false);
    RingProjection b = a;
    for (auto& s : b.slots) s.label = SemanticClass::kTrunk;  // geometry equal, labels differ
    try {
        semantic_icp(a, b, 0, SicpParams{});
        FAIL("expected NoCorrespondenceError");
    } catch (const NoCorrespondenceError& e) {
        CHECK(e.iteration() == 1);
    }
}

TEST_CASE("semantic_icp loss is non-increasing across iterations") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        const RingProjection rotated = random_ring(rng, 180, 0.8);
        RingProjection target = rotated;
        for (auto& s : target.slots) {
            if (!s.occupied) continue;
            s.x += uniform(rng, -1.5, 1.5) + uniform(rng, -0.1, 0.1);
            s.y += uniform(rng, -1.5, 1.5);
            s.r = std::hypot(s.x, s.y);
        }
        SicpParams params;
        params.converge_eps = 1e-12;  // force the full iteration count
        double prev = std::numeric_limits<double>::infinity();
        for (int iters = 1; iters <= 8; ++iters) {
            params.max_iters = iters;
            const IcpResult res = semantic_icp(target, rotated, 0, params);
            CHECK(res.loss <= prev + 1e-9);
            prev = res.loss;
        }
    }
}

TEST_CASE("estimate_relative_pose of a cloud with itself is exactly zero") {
    const LabeledCloud scene = generate_scene(SceneSpec{});
    const RelativePose pose = estimate_relative_pose(scene, scene);
    CHECK(pose.dx == 0.0);
    CHECK(pose.dy == 0.0);
    CHECK(pose.theta_deg == 0.0);
}

TEST_CASE("estimate_relative_pose handles a synthetic reverse loop") {
    SceneSpec spec;
    spec.seed = 21;
    const LabeledCloud scene = generate_scene(spec);
    OracleTransform t;
    t.theta_deg = 180.0;
    const LabeledCloud reversed = apply_transform(scene, t, 99);
    const RelativePose pose = estimate_relative_pose(reversed, scene);
    CHECK(std::abs(wrap_degrees(pose.theta_deg - 180.0)) <= 360.0 / SicpParams{}.na);
}

TEST_CASE("estimate_relative_pose recovers a noisy planted transform") {
    SceneSpec spec;
    spec.seed = 22;
    const LabeledCloud scene = generate_scene(spec);
    OracleTransform t;
    t.dx = 2.0;
    t.dy = -1.0;
    t.theta_deg = 30.0;
    t.noise_sigma = 0.05;
    const LabeledCloud moved = apply_transform(scene, t, 100);
    const RelativePose pose = estimate_relative_pose(moved, scene);
    CHECK(std::abs(pose.dx - t.dx) <= 0.3);
    CHECK(std::abs(pose.dy - t.dy) <= 0.3);
    CHECK(std::abs(wrap_degrees(pose.theta_deg - t.theta_deg)) <= 1.0);
}

TEST_CASE("estimated pose maps ring points onto their counterparts") {
    // Left-inverse property at quantization scale: fully occupied rings,
    // noise-free on-grid transform with a translation small enough that every
    // cloud point stays its sector's winner in both frames. The aligned ring
    // then lands within one sector arc plus the convergence budget.
    SicpParams params;
    params.na = 120;
    std::mt19937_64 rng(23);
    LabeledCloud cloud;
    const SemanticClass classes[4] = {SemanticClass::kBuilding, SemanticClass::kTrunk,
                                      SemanticClass::kTrafficSign, SemanticClass::kPole};
    for (int k = 0; k < params.na; ++k) {
        const double phi = -kPi + (k + 0.5) * 2.0 * kPi / params.na;
        const double r = uniform(rng, 20.0, 40.0);
        cloud.points.push_back(
            {r * std::cos(phi), r * std::sin(phi), 1.0, classes[rng() % 4]});
    }
    OracleTransform t;
    t.dx = 0.08;
    t.dy = -0.05;
    t.theta_deg = 360.0 * 31 / params.na;  // on-grid rotation
    const LabeledCloud moved = apply_transform(cloud, t, 101);

    const RingProjection ring_a = build_ring(moved, params.na);
    const RingProjection ring_b = build_ring(cloud, params.na);
    REQUIRE(ring_a.occupied_count() == params.na);
    REQUIRE(ring_b.occupied_count() == params.na);

    SicpParams est_params = params;
    const RelativePose pose =
        estimate_relative_pose(moved, cloud, est_params);

    double r_max = 0.0;
    for (const auto& s : ring_b.slots) r_max = std::max(r_max, s.r);
    const double tol = 2.0 * kPi * r_max / params.na + params.converge_eps;

    const double c = std::cos(pose.theta_deg * kPi / 180.0);
    const double s = std::sin(pose.theta_deg * kPi / 180.0);
    for (const auto& slot : ring_b.slots) {
        const double ax = c * slot.x - s * slot.y + pose.dx;
        const double ay = s * slot.x + c * slot.y + pose.dy;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& other : ring_a.slots)
            best = std::min(best, std::hypot(other.x - ax, other.y - ay));
        CHECK(best <= tol);
    }
}

TEST_CASE("wrap_degrees lands in (-180, 180]") {
    CHECK(wrap_degrees(360.0) == doctest::Approx(0.0));
    CHECK(wrap_degrees(181.0) == doctest::Approx(-179.0));
    CHECK(wrap_degrees(-180.0) == doctest::Approx(180.0));
    CHECK(wrap_degrees(180.0) == doctest::Approx(180.0));
    CHECK(wrap_degrees(-540.0) == doctest::Approx(180.0));
}

TEST_CASE("RelativePose::inverse composes to identity") {
    RelativePose pose;
    pose.dx = 2.5;
    pose.dy = -1.25;
    pose.theta_deg = 77.0;
    const RelativePose inv = pose.inverse();
    // apply pose then inverse to a probe point
    const double c1 = std::cos(pose.theta_deg * kPi / 180.0);
    const double s1 = std::sin(pose.theta_deg * kPi / 180.0);
    const double x1 = c1 * 3.0 - s1 * 4.0 + pose.dx;
    const double y1 = s1 * 3.0 + c1 * 4.0 + pose.dy;
    const double c2 = std::cos(inv.theta_deg * kPi / 180.0);
    const double s2 = std::sin(inv.theta_deg * kPi / 180.0);
    CHECK(c2 * x1 - s2 * y1 + inv.dx == doctest::Approx(3.0));
    CHECK(s2 * x1 + c2 * y1 + inv.dy == doctest::Approx(4.0));
}
