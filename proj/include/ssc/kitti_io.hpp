#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "ssc/semantics.hpp"

namespace ssc {

/// Rigid transform in the LiDAR frame. The rotation block must be
/// orthonormal with determinant +1 within 1e-6.
struct PoseSE3 {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static PoseSE3 identity() { return {}; }
    static PoseSE3 from_matrix(const Eigen::Matrix4d& m);

    Eigen::Matrix4d matrix() const;
    PoseSE3 inverse() const;
    PoseSE3 operator*(const PoseSE3& rhs) const;

    bool is_valid(double tol = 1e-6) const;
    /// Nearest-rotation projection of the rotation block (via SVD).
    PoseSE3 orthonormalized() const;
};

/// File lists and poses of one sequence; all three have equal length.
struct SequenceIndex {
    std::vector<std::filesystem::path> scans;
    std::vector<std::filesystem::path> labels;
    std::vector<PoseSE3> poses;

    std::size_t size() const { return scans.size(); }
};

/// Reads a KITTI velodyne `.bin` scan: consecutive little-endian f32
/// quadruples (x, y, z, reflectance); reflectance is discarded and every
/// point starts `unlabeled`. Throws IoError when the size is not a multiple
/// of 16 bytes.
LabeledCloud load_scan(const std::filesystem::path& path);

/// Attaches SemanticKITTI labels (one little-endian u32 per point, low 16
/// bits = class id) to a scan, remapped through remap_label. Throws IoError
/// when the label count differs from the point count.
LabeledCloud load_labels(const std::filesystem::path& path, LabeledCloud cloud);

/// Reads per-frame camera poses (12 floats per line, row-major 3x4) and the
/// calib `Tr:` line (LiDAR -> camera), returning LiDAR-frame poses
/// Tr^-1 * T_cam * Tr, each orthonormalized.
std::vector<PoseSE3> load_poses(const std::filesystem::path& poses_path,
                                const std::filesystem::path& calib_path);

/// Parses the `Tr:` line of a calib file into a 4x4 transform.
Eigen::Matrix4d load_calib_tr(const std::filesystem::path& calib_path);

/// Writers for the same byte formats (used to export synthetic scenes).
void write_scan(const std::filesystem::path& path, const LabeledCloud& cloud);
void write_labels(const std::filesystem::path& path, const LabeledCloud& cloud);
void write_poses(const std::filesystem::path& path, const std::vector<PoseSE3>& poses);
void write_identity_calib(const std::filesystem::path& path);

/// Locates scans, labels and poses under `root/sequences/<seq>/`, accepting
/// poses either next to the sequence or under `root/poses/<seq>.txt`.
SequenceIndex index_sequence(const std::filesystem::path& root, const std::string& sequence);

}  // namespace ssc
