#include "ssc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_set>

#include "ssc/errors.hpp"

namespace ssc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

// mt19937_64 output is standardized, so hand-rolled transforms keep scene
// bytes identical across platforms (std:: distributions are not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // in [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal(double mu = 0.0, double sigma = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mu + sigma * spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return mu + sigma * mag * std::cos(2.0 * kPi * u2);
    }

    std::uint64_t next() { return eng_(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

void add_point(LabeledCloud& cloud, double x, double y, double z, SemanticClass label) {
    cloud.points.push_back({x, y, z, label});
}

void add_wall(Rng& rng, LabeledCloud& cloud, double cx, double cy) {
    const double alpha = rng.uniform(0.0, kPi);
    const double length = rng.uniform(8.0, 18.0);
    const double height = rng.uniform(4.0, 8.0);
    const double ux = std::cos(alpha), uy = std::sin(alpha);
    for (double u = -length / 2; u <= length / 2; u += 0.35) {
        for (double z = 0.2; z <= height; z += 0.4) {
            add_point(cloud, cx + u * ux + rng.normal(0.0, 0.02),
                      cy + u * uy + rng.normal(0.0, 0.02), z, SemanticClass::kBuilding);
        }
    }
}

void add_cylinder(Rng& rng, LabeledCloud& cloud, double cx, double cy, double radius,
                  double height, SemanticClass label) {
    for (double z = 0.2; z <= height; z += 0.3) {
        for (int k = 0; k < 6; ++k) {
            const double beta = rng.uniform(0.0, 2.0 * kPi);
            add_point(cloud, cx + radius * std::cos(beta), cy + radius * std::sin(beta), z, label);
        }
    }
}

void add_sign(Rng& rng, LabeledCloud& cloud, double cx, double cy) {
    const double alpha = rng.uniform(0.0, kPi);
    const double z0 = rng.uniform(2.5, 3.8);
    const double ux = std::cos(alpha), uy = std::sin(alpha);
    for (double u = -0.3; u <= 0.3; u += 0.1) {
        for (double v = -0.3; v <= 0.3; v += 0.1) {
            add_point(cloud, cx + u * ux + rng.normal(0.0, 0.01),
                      cy + u * uy + rng.normal(0.0, 0.01), z0 + v, SemanticClass::kTrafficSign);
        }
    }
}

void add_vegetation(Rng& rng, LabeledCloud& cloud, double cx, double cy) {
    const double cz = rng.uniform(1.0, 2.5);
    for (int k = 0; k < 120; ++k) {
        add_point(cloud, cx + rng.normal(0.0, 1.2), cy + rng.normal(0.0, 1.2),
                  std::max(0.1, cz + rng.normal(0.0, 0.8)), SemanticClass::kVegetation);
    }
}

void add_car(Rng& rng, LabeledCloud& cloud, double cx, double cy) {
    const double alpha = rng.uniform(0.0, kPi);
    const double ux = std::cos(alpha), uy = std::sin(alpha);
    const double vx = -uy, vy = ux;
    for (double u = -2.1; u <= 2.1; u += 0.3) {
        for (double v = -0.9; v <= 0.9; v += 0.3) {
            // roof
            add_point(cloud, cx + u * ux + v * vx, cy + u * uy + v * vy, 1.45,
                      SemanticClass::kCar);
        }
        for (double z = 0.25; z <= 1.3; z += 0.35) {  // long sides
            add_point(cloud, cx + u * ux - 0.9 * vx, cy + u * uy - 0.9 * vy, z,
                      SemanticClass::kCar);
            add_point(cloud, cx + u * ux + 0.9 * vx, cy + u * uy + 0.9 * vy, z,
                      SemanticClass::kCar);
        }
    }
}

void add_ground(Rng& rng, LabeledCloud& cloud, double cx, double cy, double radius,
                double density) {
    const int n = static_cast<int>(density * kPi * radius * radius);
    for (int k = 0; k < n; ++k) {
        const double ang = rng.uniform(0.0, 2.0 * kPi);
        const double rad = radius * std::sqrt(rng.uniform());
        add_point(cloud, cx + rad * std::cos(ang), cy + rad * std::sin(ang),
                  rng.normal(0.0, 0.02), SemanticClass::kRoad);
    }
}

// Stratified azimuth placement keeps every octant populated once a handful
// of structures exist, which the yaw search depends on.
void place_radial(Rng& rng, int count, double cx, double cy, double min_d, double max_d,
                  const std::function<void(double, double)>& emit) {
    for (int k = 0; k < count; ++k) {
        const double ang = 2.0 * kPi * (k + 0.1 + 0.8 * rng.uniform()) / count - kPi;
        const double dist = rng.uniform(min_d, max_d);
        emit(cx + dist * std::cos(ang), cy + dist * std::sin(ang));
    }
}

void add_scene(Rng& rng, LabeledCloud& cloud, double cx, double cy, const SceneSpec& spec) {
    const double max_d = std::max(12.0, 0.45 * spec.extent);
    place_radial(rng, spec.walls, cx, cy, 10.0, max_d,
                 [&](double x, double y) { add_wall(rng, cloud, x, y); });
    place_radial(rng, spec.trunks, cx, cy, 8.0, max_d, [&](double x, double y) {
        add_cylinder(rng, cloud, x, y, 0.25, rng.uniform(3.0, 6.0), SemanticClass::kTrunk);
    });
    place_radial(rng, spec.poles, cx, cy, 8.0, max_d, [&](double x, double y) {
        add_cylinder(rng, cloud, x, y, 0.08, rng.uniform(5.0, 7.5), SemanticClass::kPole);
    });
    place_radial(rng, spec.signs, cx, cy, 8.0, max_d,
                 [&](double x, double y) { add_sign(rng, cloud, x, y); });
    place_radial(rng, spec.vegetation, cx, cy, 9.0, max_d,
                 [&](double x, double y) { add_vegetation(rng, cloud, x, y); });
    place_radial(rng, spec.cars, cx, cy, 7.0, max_d,
                 [&](double x, double y) { add_car(rng, cloud, x, y); });
    add_ground(rng, cloud, cx, cy, 0.5 * spec.extent, spec.ground_density);
}

}  // namespace

LabeledCloud generate_scene(const SceneSpec& spec) {
    if (spec.extent <= 0.0) throw Error("SceneSpec: extent must be > 0");
    if (spec.walls < 0 || spec.trunks < 0 || spec.poles < 0 || spec.signs < 0 ||
        spec.vegetation < 0 || spec.cars < 0 || spec.ground_density < 0.0)
        throw Error("SceneSpec: counts must be >= 0");
    Rng rng(spec.seed);
    LabeledCloud cloud;
    add_scene(rng, cloud, 0.0, 0.0, spec);
    return cloud;
}

LabeledCloud apply_transform(const LabeledCloud& cloud, const OracleTransform& t,
                             std::uint64_t seed) {
    if (t.dropout_rate < 0.0 || t.dropout_rate >= 1.0)
        throw Error("OracleTransform: dropout_rate must be in [0, 1)");
    Rng rng(seed);
    const double c = std::cos(t.theta_deg * kDegToRad);
    const double s = std::sin(t.theta_deg * kDegToRad);
    LabeledCloud out;
    out.frame_id = cloud.frame_id;
    out.points.reserve(cloud.points.size());
    for (const auto& p : cloud.points) {
        SemanticPoint q;
        q.x = c * p.x - s * p.y + t.dx + rng.normal(0.0, t.noise_sigma);
        q.y = s * p.x + c * p.y + t.dy + rng.normal(0.0, t.noise_sigma);
        q.z = p.z + rng.normal(0.0, t.noise_sigma);
        q.label = p.label;
        const bool keep = rng.uniform() >= t.dropout_rate;
        if (keep) out.points.push_back(q);
    }
    return out;
}

namespace {

struct LabelPoints {
    std::vector<std::pair<double, double>> by_label[256];
};

LabelPoints collect_occupied(const RingProjection& ring) {
    LabelPoints lp;
    for (const auto& slot : ring.slots)
        if (slot.occupied) lp.by_label[class_code(slot.label)].emplace_back(slot.x, slot.y);
    return lp;
}

double nn_loss(const LabelPoints& targets, const RingProjection& rotated, double dx, double dy) {
    double loss = 0.0;
    for (const auto& slot : rotated.slots) {
        if (!slot.occupied) continue;
        const auto& cands = targets.by_label[class_code(slot.label)];
        if (cands.empty()) continue;
        const double px = slot.x + dx;
        const double py = slot.y + dy;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [tx, ty] : cands) {
            const double ex = tx - px;
            const double ey = ty - py;
            const double d2 = ex * ex + ey * ey;
            if (d2 < best) best = d2;
        }
        loss += 0.5 * best;
    }
    return loss;
}

}  // namespace

OracleTranslation oracle_translation(const RingProjection& target,
                                     const RingProjection& rotated, int /*shift*/,
                                     double grid_step, double bound) {
    if (!(grid_step > 0.0)) throw Error("oracle_translation: grid_step must be > 0");
    if (!(bound > 0.0)) throw Error("oracle_translation: bound must be > 0");
    const LabelPoints targets = collect_occupied(target);
    const int steps = static_cast<int>(std::llround(2.0 * bound / grid_step));
    OracleTranslation best;
    best.loss = std::numeric_limits<double>::infinity();
    for (int ix = 0; ix <= steps; ++ix) {
        const double gx = -bound + ix * grid_step;
        for (int iy = 0; iy <= steps; ++iy) {
            const double gy = -bound + iy * grid_step;
            const double loss = nn_loss(targets, rotated, gx, gy);
            if (loss < best.loss) {
                best.loss = loss;
                best.dx = gx;
                best.dy = gy;
            }
        }
    }
    return best;
}

double oracle_loss_at(const RingProjection& target, const RingProjection& rotated, double dx,
                      double dy) {
    return nn_loss(collect_occupied(target), rotated, dx, dy);
}

SyntheticSequence generate_sequence(const SequenceSpec& spec) {
    if (spec.n_frames < 1) throw Error("SequenceSpec: n_frames must be >= 1");
    if (spec.grid_cols < 1) throw Error("SequenceSpec: grid_cols must be >= 1");
    for (const auto& loop : spec.loops) {
        if (loop.earlier < 0 || loop.later >= spec.n_frames || loop.earlier >= loop.later)
            throw Error("SequenceSpec: loop frames out of range");
    }

    // Frame sites on a coarse grid; planted loops reuse an earlier site.
    std::vector<double> px(spec.n_frames), py(spec.n_frames), heading(spec.n_frames);
    std::unordered_set<int> revisits;
    for (int k = 0; k < spec.n_frames; ++k) {
        px[k] = spec.spacing * (k % spec.grid_cols);
        py[k] = spec.spacing * (k / spec.grid_cols);
        heading[k] = std::fmod(40.0 * k, 360.0);
    }
    for (const auto& loop : spec.loops) {
        px[loop.later] = px[loop.earlier] + loop.offset_x;
        py[loop.later] = py[loop.earlier] + loop.offset_y;
        heading[loop.later] = std::fmod(heading[loop.earlier] + loop.heading_offset_deg, 360.0);
        revisits.insert(loop.later);
    }

    // Shared world: one local scene per distinct site.
    Rng rng(spec.seed);
    LabeledCloud world;
    SceneSpec site;
    site.walls = 6;
    site.trunks = 8;
    site.poles = 5;
    site.signs = 4;
    site.vegetation = 4;
    site.cars = 2;
    site.ground_density = 0.15;
    site.extent = 90.0;
    for (int k = 0; k < spec.n_frames; ++k) {
        if (revisits.count(k)) continue;
        add_scene(rng, world, px[k], py[k], site);
    }

    SyntheticSequence seq;
    seq.frames.resize(static_cast<std::size_t>(spec.n_frames));
    seq.poses.resize(static_cast<std::size_t>(spec.n_frames));
    for (int k = 0; k < spec.n_frames; ++k) {
        const double h = heading[k] * kDegToRad;
        const double c = std::cos(h), s = std::sin(h);
        PoseSE3 pose;
        pose.rotation << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
        pose.translation = Eigen::Vector3d(px[k], py[k], 0.0);
        seq.poses[static_cast<std::size_t>(k)] = pose;

        Rng frame_rng(spec.seed ^ (0x9e3779b97f4a7c15ULL * (k + 1)));
        LabeledCloud frame;
        frame.frame_id = static_cast<std::uint32_t>(k);
        const double range2 = spec.sensor_range * spec.sensor_range;
        for (const auto& p : world.points) {
            const double wx = p.x - px[k];
            const double wy = p.y - py[k];
            if (wx * wx + wy * wy >= range2) continue;
            SemanticPoint q;
            // world -> sensor frame, then measurement noise
            q.x = c * wx + s * wy + frame_rng.normal(0.0, spec.sigma);
            q.y = -s * wx + c * wy + frame_rng.normal(0.0, spec.sigma);
            q.z = p.z + frame_rng.normal(0.0, spec.sigma);
            q.label = p.label;
            frame.points.push_back(q);
        }
        seq.frames[static_cast<std::size_t>(k)] = std::move(frame);
    }
    return seq;
}

}  // namespace ssc
