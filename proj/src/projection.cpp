#include "ssc/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssc/errors.hpp"

namespace ssc {

namespace {
constexpr double kPi = std::numbers::pi;
}

void SicpParams::validate() const {
    if (na < 4) throw Error("SicpParams: na must be >= 4");
    if (nl <= 0 || nl > na) throw Error("SicpParams: nl must be in (0, na]");
    if (max_iters < 1) throw Error("SicpParams: max_iters must be >= 1");
    if (!(converge_eps > 0.0)) throw Error("SicpParams: converge_eps must be > 0");
    if (refine_passes < 0) throw Error("SicpParams: refine_passes must be >= 0");
}

int RingProjection::occupied_count() const {
    return static_cast<int>(
        std::count_if(slots.begin(), slots.end(), [](const RingSlot& s) { return s.occupied; }));
}

const std::vector<SemanticClass>& default_representative_classes() {
    static const std::vector<SemanticClass> classes = {
        SemanticClass::kBuilding,
        SemanticClass::kTrunk,
        SemanticClass::kTrafficSign,
        SemanticClass::kPole,
    };
    return classes;
}

LabeledCloud filter_representative(const LabeledCloud& cloud,
                                   const std::vector<SemanticClass>& keep) {
    LabeledCloud out;
    out.frame_id = cloud.frame_id;
    out.points.reserve(cloud.points.size());
    for (const auto& p : cloud.points) {
        if (std::find(keep.begin(), keep.end(), p.label) != keep.end())
            out.points.push_back(p);
    }
    return out;
}

PolarPoint to_polar(double x, double y) {
    if (x == 0.0 && y == 0.0)
        throw DegeneratePointError("to_polar: point at the sensor origin");
    PolarPoint p;
    p.r = std::hypot(x, y);
    p.phi = std::atan2(y, x);
    if (p.phi >= kPi) p.phi = -kPi;  // atan2 returns (-pi, pi]; fold +pi onto -pi
    return p;
}

RingProjection build_ring(const LabeledCloud& cloud, int na) {
    if (na < 1) throw Error("build_ring: na must be >= 1");
    RingProjection ring;
    ring.slots.resize(static_cast<std::size_t>(na));
    const double scale = static_cast<double>(na) / (2.0 * kPi);
    for (const auto& p : cloud.points) {
        if (p.x == 0.0 && p.y == 0.0) continue;
        PolarPoint polar = to_polar(p.x, p.y);
        int k = static_cast<int>(std::floor((polar.phi + kPi) * scale));
        k = std::clamp(k, 0, na - 1);
        RingSlot& slot = ring.slots[static_cast<std::size_t>(k)];
        if (!slot.occupied || polar.r < slot.r) {
            slot.occupied = true;
            slot.r = polar.r;
            slot.x = p.x;
            slot.y = p.y;
            slot.label = p.label;
        }
    }
    return ring;
}

}  // namespace ssc
