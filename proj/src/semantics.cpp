#include "ssc/semantics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ssc/errors.hpp"

namespace ssc {

namespace {

struct ClassInfo {
    SemanticClass cls;
    std::string_view name;
};

constexpr std::array<ClassInfo, kNumClasses> kClassInfo = {{
    {SemanticClass::kUnlabeled, "unlabeled"},
    {SemanticClass::kCar, "car"},
    {SemanticClass::kBicycle, "bicycle"},
    {SemanticClass::kMotorcycle, "motorcycle"},
    {SemanticClass::kTruck, "truck"},
    {SemanticClass::kOtherVehicle, "other-vehicle"},
    {SemanticClass::kPerson, "person"},
    {SemanticClass::kBicyclist, "bicyclist"},
    {SemanticClass::kMotorcyclist, "motorcyclist"},
    {SemanticClass::kRoad, "road"},
    {SemanticClass::kParking, "parking"},
    {SemanticClass::kSidewalk, "sidewalk"},
    {SemanticClass::kOtherGround, "other-ground"},
    {SemanticClass::kBuilding, "building"},
    {SemanticClass::kFence, "fence"},
    {SemanticClass::kVegetation, "vegetation"},
    {SemanticClass::kTrunk, "trunk"},
    {SemanticClass::kTerrain, "terrain"},
    {SemanticClass::kPole, "pole"},
    {SemanticClass::kTrafficSign, "traffic-sign"},
}};

// SemanticKITTI learning map keyed on the raw 16-bit id. Moving classes fold
// onto their static counterpart, outlier/other-structure/other-object fold
// onto unlabeled, lane-marking folds onto road. Canonical ids map to
// themselves, which makes remap_label idempotent.
struct RawMapping {
    std::uint16_t raw;
    SemanticClass cls;
};

constexpr RawMapping kRawMap[] = {
    {0, SemanticClass::kUnlabeled},     // unlabeled
    {1, SemanticClass::kUnlabeled},     // outlier
    {10, SemanticClass::kCar},
    {11, SemanticClass::kBicycle},
    {13, SemanticClass::kOtherVehicle},  // bus
    {15, SemanticClass::kMotorcycle},
    {16, SemanticClass::kOtherVehicle},  // on-rails
    {18, SemanticClass::kTruck},
    {20, SemanticClass::kOtherVehicle},
    {30, SemanticClass::kPerson},
    {31, SemanticClass::kBicyclist},
    {32, SemanticClass::kMotorcyclist},
    {40, SemanticClass::kRoad},
    {44, SemanticClass::kParking},
    {48, SemanticClass::kSidewalk},
    {49, SemanticClass::kOtherGround},
    {50, SemanticClass::kBuilding},
    {51, SemanticClass::kFence},
    {52, SemanticClass::kUnlabeled},    // other-structure
    {60, SemanticClass::kRoad},         // lane-marking
    {70, SemanticClass::kVegetation},
    {71, SemanticClass::kTrunk},
    {72, SemanticClass::kTerrain},
    {80, SemanticClass::kPole},
    {81, SemanticClass::kTrafficSign},
    {99, SemanticClass::kUnlabeled},       // other-object
    {252, SemanticClass::kCar},            // moving-car
    {253, SemanticClass::kBicyclist},      // moving-bicyclist
    {254, SemanticClass::kPerson},         // moving-person
    {255, SemanticClass::kMotorcyclist},   // moving-motorcyclist
    {256, SemanticClass::kOtherVehicle},   // moving-on-rails
    {257, SemanticClass::kOtherVehicle},   // moving-bus
    {258, SemanticClass::kTruck},          // moving-truck
    {259, SemanticClass::kOtherVehicle},   // moving-other-vehicle
};

const std::array<SemanticClass, 65536>& raw_lookup() {
    static const std::array<SemanticClass, 65536> table = [] {
        std::array<SemanticClass, 65536> t{};
        t.fill(SemanticClass::kUnlabeled);
        for (const auto& m : kRawMap) t[m.raw] = m.cls;
        return t;
    }();
    return table;
}

}  // namespace

const std::array<SemanticClass, kNumClasses>& all_classes() {
    static const std::array<SemanticClass, kNumClasses> classes = [] {
        std::array<SemanticClass, kNumClasses> c{};
        for (std::size_t i = 0; i < kNumClasses; ++i) c[i] = kClassInfo[i].cls;
        return c;
    }();
    return classes;
}

std::string_view class_name(SemanticClass c) {
    for (const auto& info : kClassInfo)
        if (info.cls == c) return info.name;
    return "unlabeled";
}

SemanticClass class_from_name(std::string_view name) {
    for (const auto& info : kClassInfo)
        if (info.name == name) return info.cls;
    throw Error("unknown semantic class name: " + std::string(name));
}

SemanticClass remap_label(std::uint32_t raw) {
    return raw_lookup()[raw & 0xffffu];
}

PriorityTable PriorityTable::default_priority() {
    // Descending representativeness; rank 19 is the most representative.
    static constexpr std::array<SemanticClass, kNumClasses> kDescending = {
        SemanticClass::kTrafficSign, SemanticClass::kPole,
        SemanticClass::kTrunk,       SemanticClass::kPerson,
        SemanticClass::kBicyclist,   SemanticClass::kMotorcyclist,
        SemanticClass::kBicycle,     SemanticClass::kMotorcycle,
        SemanticClass::kTruck,       SemanticClass::kOtherVehicle,
        SemanticClass::kCar,         SemanticClass::kFence,
        SemanticClass::kBuilding,    SemanticClass::kOtherGround,
        SemanticClass::kParking,     SemanticClass::kSidewalk,
        SemanticClass::kTerrain,     SemanticClass::kVegetation,
        SemanticClass::kRoad,        SemanticClass::kUnlabeled,
    };
    std::array<int, kNumClasses> ranks{};
    for (std::size_t i = 0; i < kNumClasses; ++i) {
        SemanticClass c = kDescending[i];
        int rank = static_cast<int>(kNumClasses) - 1 - static_cast<int>(i);
        for (std::size_t k = 0; k < kNumClasses; ++k)
            if (all_classes()[k] == c) ranks[k] = rank;
    }
    return from_ranks(ranks);
}

PriorityTable PriorityTable::from_ranks(const std::array<int, kNumClasses>& ranks) {
    std::array<bool, kNumClasses> seen{};
    for (int r : ranks) {
        if (r < 0 || r >= static_cast<int>(kNumClasses))
            throw Error("priority rank out of range: " + std::to_string(r));
        if (seen[r]) throw Error("duplicate priority rank: " + std::to_string(r));
        seen[r] = true;
    }
    PriorityTable t;
    t.rank_by_code_.fill(-1);
    for (std::size_t i = 0; i < kNumClasses; ++i)
        t.rank_by_code_[class_code(all_classes()[i])] = ranks[i];
    if (t.rank(SemanticClass::kUnlabeled) != 0)
        throw Error("`unlabeled` must hold the lowest priority rank");
    return t;
}

PriorityTable PriorityTable::with_swapped(SemanticClass a, SemanticClass b) const {
    std::array<int, kNumClasses> ranks{};
    for (std::size_t i = 0; i < kNumClasses; ++i) {
        SemanticClass c = all_classes()[i];
        if (c == a)
            ranks[i] = rank(b);
        else if (c == b)
            ranks[i] = rank(a);
        else
            ranks[i] = rank(c);
    }
    return from_ranks(ranks);
}

PriorityTable load_priority(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open priority file: " + path.string());
    std::array<int, kNumClasses> ranks{};
    std::array<bool, kNumClasses> assigned{};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string name;
        int rank;
        if (!(ls >> name)) continue;  // blank line
        if (!(ls >> rank))
            throw IoError("priority file " + path.string() + " line " +
                          std::to_string(line_no) + ": expected `class-name rank`");
        SemanticClass cls = class_from_name(name);
        for (std::size_t i = 0; i < kNumClasses; ++i) {
            if (all_classes()[i] == cls) {
                ranks[i] = rank;
                assigned[i] = true;
            }
        }
    }
    for (std::size_t i = 0; i < kNumClasses; ++i)
        if (!assigned[i])
            throw IoError("priority file " + path.string() + " misses class " +
                          std::string(class_name(all_classes()[i])));
    return PriorityTable::from_ranks(ranks);
}

void save_priority(const std::filesystem::path& path, const PriorityTable& table) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write priority file: " + path.string());
    for (SemanticClass c : all_classes())
        out << class_name(c) << ' ' << table.rank(c) << '\n';
}

}  // namespace ssc
