#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "ssc/errors.hpp"
#include "ssc/semantics.hpp"

using namespace ssc;

TEST_CASE("remap_label maps the null label to unlabeled") {
    CHECK(remap_label(0) == SemanticClass::kUnlabeled);
}

TEST_CASE("remap_label folds moving classes onto static counterparts") {
    CHECK(remap_label(252) == SemanticClass::kCar);           // moving-car
    CHECK(remap_label(253) == SemanticClass::kBicyclist);     // moving-bicyclist
    CHECK(remap_label(254) == SemanticClass::kPerson);        // moving-person
    CHECK(remap_label(258) == SemanticClass::kTruck);         // moving-truck
    CHECK(remap_label(259) == SemanticClass::kOtherVehicle);  // moving-other-vehicle
}

TEST_CASE("remap_label keeps canonical static ids") {
    CHECK(remap_label(81) == SemanticClass::kTrafficSign);
    CHECK(remap_label(10) == SemanticClass::kCar);
    CHECK(remap_label(40) == SemanticClass::kRoad);
    CHECK(remap_label(71) == SemanticClass::kTrunk);
}

TEST_CASE("remap_label folds rare raw classes") {
    CHECK(remap_label(1) == SemanticClass::kUnlabeled);    // outlier
    CHECK(remap_label(13) == SemanticClass::kOtherVehicle);  // bus
    CHECK(remap_label(52) == SemanticClass::kUnlabeled);   // other-structure
    CHECK(remap_label(60) == SemanticClass::kRoad);        // lane-marking
    CHECK(remap_label(99) == SemanticClass::kUnlabeled);   // other-object
}

TEST_CASE("remap_label discards the instance id in the upper 16 bits") {
    CHECK(remap_label((1234u << 16) | 10u) == SemanticClass::kCar);
    CHECK(remap_label((0xffffu << 16) | 81u) == SemanticClass::kTrafficSign);
}

TEST_CASE("remap_label is total and idempotent") {
    for (std::uint32_t raw = 0; raw < 65536; ++raw) {
        const SemanticClass once = remap_label(raw);
        CHECK(remap_label(class_code(once)) == once);
    }
}

TEST_CASE("unknown raw ids map to unlabeled, never fail") {
    CHECK(remap_label(7) == SemanticClass::kUnlabeled);
    CHECK(remap_label(12345) == SemanticClass::kUnlabeled);
    CHECK(remap_label(65535) == SemanticClass::kUnlabeled);
}

TEST_CASE("default priority ranks rare street furniture above surfaces") {
    const PriorityTable t = PriorityTable::default_priority();
    CHECK(t.rank(SemanticClass::kTrafficSign) > t.rank(SemanticClass::kRoad));
    CHECK(t.rank(SemanticClass::kTrafficSign) == 19);
    CHECK(t.rank(SemanticClass::kPole) == 18);
    CHECK(t.rank(SemanticClass::kTrunk) == 17);
    CHECK(t.rank(SemanticClass::kCar) == 9);
    CHECK(t.rank(SemanticClass::kBuilding) == 7);
    CHECK(t.rank(SemanticClass::kVegetation) == 2);
    CHECK(t.rank(SemanticClass::kRoad) == 1);
}

TEST_CASE("unlabeled holds the strictly minimal rank") {
    const PriorityTable t = PriorityTable::default_priority();
    CHECK(t.rank(SemanticClass::kUnlabeled) == 0);
    for (SemanticClass c : all_classes())
        if (c != SemanticClass::kUnlabeled) CHECK(t.rank(c) > 0);
}

TEST_CASE("priority ranks form a bijection onto 0..19") {
    const PriorityTable t = PriorityTable::default_priority();
    std::set<int> ranks;
    for (SemanticClass c : all_classes()) ranks.insert(t.rank(c));
    CHECK(ranks.size() == kNumClasses);
    CHECK(*ranks.begin() == 0);
    CHECK(*ranks.rbegin() == 19);
}

TEST_CASE("from_ranks rejects ties, gaps, and misplaced unlabeled") {
    std::array<int, kNumClasses> ranks{};
    for (std::size_t i = 0; i < kNumClasses; ++i) ranks[i] = static_cast<int>(i);
    CHECK_NOTHROW(PriorityTable::from_ranks(ranks));

    auto tied = ranks;
    tied[3] = tied[4];
    CHECK_THROWS_AS(PriorityTable::from_ranks(tied), Error);

    auto out_of_range = ranks;
    out_of_range[5] = 20;
    CHECK_THROWS_AS(PriorityTable::from_ranks(out_of_range), Error);

    auto unlabeled_high = ranks;
    std::swap(unlabeled_high[0], unlabeled_high[1]);  // unlabeled is entry 0
    CHECK_THROWS_AS(PriorityTable::from_ranks(unlabeled_high), Error);
}

TEST_CASE("with_swapped exchanges exactly two ranks") {
    const PriorityTable t = PriorityTable::default_priority();
    const PriorityTable s = t.with_swapped(SemanticClass::kCar, SemanticClass::kBuilding);
    CHECK(s.rank(SemanticClass::kCar) == t.rank(SemanticClass::kBuilding));
    CHECK(s.rank(SemanticClass::kBuilding) == t.rank(SemanticClass::kCar));
    CHECK(s.rank(SemanticClass::kRoad) == t.rank(SemanticClass::kRoad));
}

TEST_CASE("priority table config file round trip") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "ssc_priority_test.txt";
    const PriorityTable t = PriorityTable::default_priority();
    save_priority(path, t);
    const PriorityTable loaded = load_priority(path);
    for (SemanticClass c : all_classes()) CHECK(loaded.rank(c) == t.rank(c));
    fs::remove(path);
}

TEST_CASE("priority file errors") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "ssc_priority_bad.txt";
    {
        std::ofstream out(path);
        out << "car 9\n";  // misses every other class
    }
    CHECK_THROWS_AS(load_priority(path), IoError);
    CHECK_THROWS_AS(load_priority(fs::temp_directory_path() / "ssc_no_such_file.txt"), IoError);
    fs::remove(path);
}

TEST_CASE("class names round trip") {
    for (SemanticClass c : all_classes()) CHECK(class_from_name(class_name(c)) == c);
    CHECK_THROWS_AS(class_from_name("warp-core"), Error);
}
