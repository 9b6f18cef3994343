#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace ssc {

/// Semantic classes after remapping, identified by their canonical
/// SemanticKITTI id. Moving variants fold onto the static class with the
/// same geometry, so remapping an already-remapped code is the identity.
enum class SemanticClass : std::uint8_t {
    kUnlabeled = 0,
    kCar = 10,
    kBicycle = 11,
    kMotorcycle = 15,
    kTruck = 18,
    kOtherVehicle = 20,
    kPerson = 30,
    kBicyclist = 31,
    kMotorcyclist = 32,
    kRoad = 40,
    kParking = 44,
    kSidewalk = 48,
    kOtherGround = 49,
    kBuilding = 50,
    kFence = 51,
    kVegetation = 70,
    kTrunk = 71,
    kTerrain = 72,
    kPole = 80,
    kTrafficSign = 81,
};

inline constexpr std::size_t kNumClasses = 20;

/// All classes in ascending code order, `unlabeled` first.
const std::array<SemanticClass, kNumClasses>& all_classes();

inline std::uint8_t class_code(SemanticClass c) { return static_cast<std::uint8_t>(c); }

std::string_view class_name(SemanticClass c);

/// Inverse of class_name. Throws Error on an unknown name.
SemanticClass class_from_name(std::string_view name);

/// Remaps a raw SemanticKITTI label. The low 16 bits carry the semantic id,
/// the high 16 bits carry the instance id and are discarded. Unknown ids map
/// to `unlabeled`; this never fails.
SemanticClass remap_label(std::uint32_t raw);

struct SemanticPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    SemanticClass label = SemanticClass::kUnlabeled;
};

/// A scan: points in sensor scan order plus the frame id they came from.
struct LabeledCloud {
    std::vector<SemanticPoint> points;
    std::uint32_t frame_id = 0;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Total ordering over semantic classes; a higher rank marks a class as more
/// representative of a place. Ranks are a permutation of {0..19} and
/// `unlabeled` always holds rank 0.
class PriorityTable {
public:
    /// Fixed rarity ordering: thin static street furniture ranks above
    /// vehicles, which rank above surfaces; `unlabeled` is last.
    static PriorityTable default_priority();

    /// Builds a table from explicit ranks (one per class). Throws Error when
    /// the ranks are not a permutation of {0..19} or `unlabeled` is not 0.
    static PriorityTable from_ranks(const std::array<int, kNumClasses>& ranks);

    int rank(SemanticClass c) const { return rank_by_code_[class_code(c)]; }

    /// Returns a copy with the ranks of `a` and `b` exchanged.
    PriorityTable with_swapped(SemanticClass a, SemanticClass b) const;

private:
    PriorityTable() = default;
    std::array<int, 256> rank_by_code_{};
};

/// Reads a priority table from a UTF-8 config file with one
/// `class-name rank` pair per line. `#` starts a comment.
PriorityTable load_priority(const std::filesystem::path& path);

void save_priority(const std::filesystem::path& path, const PriorityTable& table);

}  // namespace ssc
