#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "ssc/errors.hpp"
#include "ssc/evaluation.hpp"
#include "ssc/kitti_io.hpp"

using namespace ssc;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / name; }

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void append_f32(std::vector<std::uint8_t>& bytes, float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<std::uint8_t>((u >> (8 * k)) & 0xff));
}

void append_u32(std::vector<std::uint8_t>& bytes, std::uint32_t u) {
    for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<std::uint8_t>((u >> (8 * k)) & 0xff));
}

}  // namespace

TEST_CASE("load_scan decodes little-endian float quadruples") {
    std::vector<std::uint8_t> bytes;
    for (float v : {1.f, 2.f, 3.f, 0.5f, 4.f, 5.f, 6.f, 0.1f}) append_f32(bytes, v);
    const fs::path path = temp_file("ssc_scan_two.bin");
    write_bytes(path, bytes);
    const LabeledCloud cloud = load_scan(path);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[0].x == 1.0);
    CHECK(cloud.points[0].y == 2.0);
    CHECK(cloud.points[0].z == 3.0);
    CHECK(cloud.points[1].x == 4.0);
    CHECK(cloud.points[1].y == 5.0);
    CHECK(cloud.points[1].z == 6.0);
    CHECK(cloud.points[0].label == SemanticClass::kUnlabeled);
    fs::remove(path);
}

TEST_CASE("load_scan of an empty file is an empty cloud") {
    const fs::path path = temp_file("ssc_scan_empty.bin");
    write_bytes(path, {});
    CHECK(load_scan(path).empty());
    fs::remove(path);
}

TEST_CASE("load_scan rejects a misaligned file with the byte offset") {
    const fs::path path = temp_file("ssc_scan_bad.bin");
    write_bytes(path, std::vector<std::uint8_t>(17, 0));
    try {
        load_scan(path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("17") != std::string::npos);
        CHECK(msg.find("16") != std::string::npos);
    }
    fs::remove(path);
}

TEST_CASE("load_labels attaches remapped labels positionally") {
    std::vector<std::uint8_t> scan_bytes;
    for (float v : {1.f, 0.f, 0.f, 0.f, 2.f, 0.f, 0.f, 0.f}) append_f32(scan_bytes, v);
    const fs::path scan_path = temp_file("ssc_lbl_scan.bin");
    write_bytes(scan_path, scan_bytes);

    std::vector<std::uint8_t> label_bytes;
    append_u32(label_bytes, 0);
    append_u32(label_bytes, 81);
    const fs::path label_path = temp_file("ssc_lbl.label");
    write_bytes(label_path, label_bytes);

    const LabeledCloud cloud = load_labels(label_path, load_scan(scan_path));
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[0].label == SemanticClass::kUnlabeled);
    CHECK(cloud.points[1].label == SemanticClass::kTrafficSign);
    fs::remove(scan_path);
    fs::remove(label_path);
}

TEST_CASE("load_labels accepts the empty-on-empty case and rejects count mismatch") {
    const fs::path empty = temp_file("ssc_lbl_empty.label");
    write_bytes(empty, {});
    CHECK(load_labels(empty, LabeledCloud{}).empty());
    fs::remove(empty);

    std::vector<std::uint8_t> three;
    append_u32(three, 40);
    append_u32(three, 40);
    append_u32(three, 40);
    const fs::path path = temp_file("ssc_lbl_three.label");
    write_bytes(path, three);
    LabeledCloud two;
    two.points.resize(2);
    try {
        load_labels(path, two);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("3") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);
    }
    fs::remove(path);
}

TEST_CASE("scan write/read round trip is bit exact") {
    std::mt19937_64 rng(51);
    LabeledCloud cloud;
    for (int k = 0; k < 257; ++k) {
        SemanticPoint p;
        p.x = static_cast<float>(static_cast<double>(rng()) / 1e17 - 90.0);
        p.y = static_cast<float>(static_cast<double>(rng()) / 1e17 - 90.0);
        p.z = static_cast<float>(static_cast<double>(rng()) / 1e18 - 5.0);
        p.label = all_classes()[rng() % kNumClasses];
        cloud.points.push_back(p);
    }
    const fs::path scan_path = temp_file("ssc_roundtrip.bin");
    const fs::path label_path = temp_file("ssc_roundtrip.label");
    write_scan(scan_path, cloud);
    write_labels(label_path, cloud);
    const LabeledCloud back = load_labels(label_path, load_scan(scan_path));
    REQUIRE(back.size() == cloud.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        CHECK(back.points[k].x == cloud.points[k].x);
        CHECK(back.points[k].y == cloud.points[k].y);
        CHECK(back.points[k].z == cloud.points[k].z);
        CHECK(back.points[k].label == cloud.points[k].label);
    }
    fs::remove(scan_path);
    fs::remove(label_path);
}

TEST_CASE("load_poses with identity calib returns the camera poses") {
    const fs::path poses_path = temp_file("ssc_poses_id.txt");
    const fs::path calib_path = temp_file("ssc_calib_id.txt");
    {
        std::ofstream out(poses_path);
        out << "1 0 0 0 0 1 0 0 0 0 1 0\n";
    }
    write_identity_calib(calib_path);
    const auto poses = load_poses(poses_path, calib_path);
    REQUIRE(poses.size() == 1);
    CHECK(poses[0].translation.norm() == doctest::Approx(0.0));
    CHECK((poses[0].rotation - Eigen::Matrix3d::Identity()).norm() == doctest::Approx(0.0));
    fs::remove(poses_path);
    fs::remove(calib_path);
}

TEST_CASE("load_poses conjugates through a KITTI-style axis permutation") {
    // Camera frame: x right, y down, z forward. Tr maps LiDAR -> camera.
    // A camera-frame forward translation (0, 0, 5) is LiDAR-frame (5, 0, 0):
    // Tr^-1 * T_cam * Tr with R = [[0,-1,0],[0,0,-1],[1,0,0]] gives
    // translation R^T (0,0,5) = (5, 0, 0), magnitude 5.
    const fs::path poses_path = temp_file("ssc_poses_tr.txt");
    const fs::path calib_path = temp_file("ssc_calib_tr.txt");
    {
        std::ofstream out(poses_path);
        out << "1 0 0 0 0 1 0 0 0 0 1 5\n";
    }
    {
        std::ofstream out(calib_path);
        out << "P0: 1 0 0 0 0 1 0 0 0 0 1 0\n";
        out << "Tr: 0 -1 0 0 0 0 -1 0 1 0 0 0\n";
    }
    const auto poses = load_poses(poses_path, calib_path);
    REQUIRE(poses.size() == 1);
    CHECK(poses[0].translation.norm() == doctest::Approx(5.0));
    CHECK(poses[0].translation.x() == doctest::Approx(5.0));
    CHECK(poses[0].translation.y() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(poses[0].translation.z() == doctest::Approx(0.0).epsilon(1e-9));
    fs::remove(poses_path);
    fs::remove(calib_path);
}

TEST_CASE("load_poses rejects short lines, bad tokens, and missing Tr") {
    const fs::path poses_path = temp_file("ssc_poses_bad.txt");
    const fs::path calib_path = temp_file("ssc_calib_ok.txt");
    write_identity_calib(calib_path);

    {
        std::ofstream out(poses_path);
        out << "1 0 0 0 0 1 0 0 0 0 1\n";  // 11 floats
    }
    try {
        load_poses(poses_path, calib_path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }

    {
        std::ofstream out(poses_path);
        out << "1 0 0 0 0 1 0 0 0 0 1 0\n";
        out << "1 0 0 zero 0 1 0 0 0 0 1 0\n";
    }
    try {
        load_poses(poses_path, calib_path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    const fs::path no_tr = temp_file("ssc_calib_no_tr.txt");
    {
        std::ofstream out(no_tr);
        out << "P0: 1 0 0 0 0 1 0 0 0 0 1 0\n";
    }
    CHECK_THROWS_AS(load_poses(poses_path, no_tr), IoError);
    fs::remove(poses_path);
    fs::remove(calib_path);
    fs::remove(no_tr);
}

TEST_CASE("loaded rotations are orthonormalized") {
    const fs::path poses_path = temp_file("ssc_poses_skew.txt");
    const fs::path calib_path = temp_file("ssc_calib_skew.txt");
    {
        std::ofstream out(poses_path);
        // rotation entries rounded hard to three decimals (yaw ~ 30 deg)
        out << "0.866 -0.5 0 1 0.5 0.866 0 2 0 0 1 0\n";
    }
    write_identity_calib(calib_path);
    const auto poses = load_poses(poses_path, calib_path);
    REQUIRE(poses.size() == 1);
    CHECK(poses[0].is_valid(1e-6));
    fs::remove(poses_path);
    fs::remove(calib_path);
}

TEST_CASE("pose chain consistency: a frame against itself is the zero pose") {
    const fs::path poses_path = temp_file("ssc_poses_chain.txt");
    const fs::path calib_path = temp_file("ssc_calib_chain.txt");
    {
        std::ofstream out(poses_path);
        out << "1 0 0 10 0 1 0 -3 0 0 1 1\n";
        out << "0.866 -0.5 0 1 0.5 0.866 0 2 0 0 1 0\n";
    }
    write_identity_calib(calib_path);
    for (const PoseSE3& pose : load_poses(poses_path, calib_path)) {
        const RelativePose rel = gt_relative_pose(pose, pose);
        CHECK(rel.dx == doctest::Approx(0.0));
        CHECK(rel.dy == doctest::Approx(0.0));
        CHECK(rel.theta_deg == doctest::Approx(0.0));
    }
    fs::remove(poses_path);
    fs::remove(calib_path);
}

TEST_CASE("PoseSE3 compose and inverse") {
    PoseSE3 a;
    a.rotation = Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    a.translation = Eigen::Vector3d(1, 2, 3);
    const PoseSE3 ident = a * a.inverse();
    CHECK((ident.rotation - Eigen::Matrix3d::Identity()).norm() == doctest::Approx(0.0));
    CHECK(ident.translation.norm() == doctest::Approx(0.0));
    CHECK(a.is_valid());
}
