#include "ssc/kitti_io.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ssc/errors.hpp"

namespace ssc {

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open file: " + path.string());
    const auto size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> data(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(data.data()), size);
    if (!in) throw IoError("short read on file: " + path.string());
    return data;
}

float f32_le(const std::uint8_t* p) {
    const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                            (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) |
                            (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(u);
}

void put_f32_le(std::vector<std::uint8_t>& out, float v) {
    const std::uint32_t u = std::bit_cast<std::uint32_t>(v);
    out.push_back(static_cast<std::uint8_t>(u & 0xff));
    out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((u >> 24) & 0xff));
}

std::uint32_t u32_le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<double> parse_floats(const std::string& line) {
    std::vector<double> vals;
    const char* s = line.c_str();
    char* end = nullptr;
    while (*s) {
        while (*s == ' ' || *s == '\t' || *s == '\r') ++s;
        if (!*s) break;
        const double v = std::strtod(s, &end);
        if (end == s) return {};  // non-numeric token
        vals.push_back(v);
        s = end;
    }
    return vals;
}

Eigen::Matrix4d matrix_from_12(const std::vector<double>& v) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = v[static_cast<std::size_t>(r) * 4 + c];
    return m;
}

}  // namespace

PoseSE3 PoseSE3::from_matrix(const Eigen::Matrix4d& m) {
    PoseSE3 p;
    p.rotation = m.block<3, 3>(0, 0);
    p.translation = m.block<3, 1>(0, 3);
    return p;
}

Eigen::Matrix4d PoseSE3::matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.block<3, 3>(0, 0) = rotation;
    m.block<3, 1>(0, 3) = translation;
    return m;
}

PoseSE3 PoseSE3::inverse() const {
    PoseSE3 p;
    p.rotation = rotation.transpose();
    p.translation = -p.rotation * translation;
    return p;
}

PoseSE3 PoseSE3::operator*(const PoseSE3& rhs) const {
    PoseSE3 p;
    p.rotation = rotation * rhs.rotation;
    p.translation = rotation * rhs.translation + translation;
    return p;
}

bool PoseSE3::is_valid(double tol) const {
    const Eigen::Matrix3d gram = rotation.transpose() * rotation;
    if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(rotation.determinant() - 1.0) <= tol;
}

PoseSE3 PoseSE3::orthonormalized() const {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
        flip(2, 2) = -1.0;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    PoseSE3 p;
    p.rotation = r;
    p.translation = translation;
    return p;
}

LabeledCloud load_scan(const std::filesystem::path& path) {
    const auto data = read_all(path);
    if (data.size() % 16 != 0)
        throw IoError("malformed scan file " + path.string() + ": size " +
                      std::to_string(data.size()) +
                      " is not a multiple of 16 (partial record at byte offset " +
                      std::to_string(data.size() - data.size() % 16) + ")");
    LabeledCloud cloud;
    cloud.points.resize(data.size() / 16);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const std::uint8_t* rec = data.data() + i * 16;
        cloud.points[i].x = f32_le(rec);
        cloud.points[i].y = f32_le(rec + 4);
        cloud.points[i].z = f32_le(rec + 8);
        cloud.points[i].label = SemanticClass::kUnlabeled;
    }
    return cloud;
}

LabeledCloud load_labels(const std::filesystem::path& path, LabeledCloud cloud) {
    const auto data = read_all(path);
    if (data.size() != cloud.size() * 4)
        throw IoError("label-mismatch in " + path.string() + ": file has " +
                      std::to_string(data.size() / 4) + " labels (" +
                      std::to_string(data.size()) + " bytes), cloud has " +
                      std::to_string(cloud.size()) + " points");
    for (std::size_t i = 0; i < cloud.points.size(); ++i)
        cloud.points[i].label = remap_label(u32_le(data.data() + i * 4));
    return cloud;
}

Eigen::Matrix4d load_calib_tr(const std::filesystem::path& calib_path) {
    std::ifstream in(calib_path);
    if (!in) throw IoError("cannot open calib file: " + calib_path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("Tr:", 0) != 0) continue;
        const auto vals = parse_floats(line.substr(3));
        if (vals.size() != 12)
            throw IoError("calib file " + calib_path.string() +
                          ": Tr: line must carry 12 floats, got " + std::to_string(vals.size()));
        return matrix_from_12(vals);
    }
    throw IoError("calib file " + calib_path.string() + " has no Tr: line");
}

std::vector<PoseSE3> load_poses(const std::filesystem::path& poses_path,
                                const std::filesystem::path& calib_path) {
    const Eigen::Matrix4d tr = load_calib_tr(calib_path);
    const Eigen::Matrix4d tr_inv = tr.inverse();

    std::ifstream in(poses_path);
    if (!in) throw IoError("cannot open poses file: " + poses_path.string());
    std::vector<PoseSE3> poses;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto vals = parse_floats(line);
        if (vals.size() != 12)
            throw IoError("poses file " + poses_path.string() + " line " +
                          std::to_string(line_no) + ": expected 12 floats, got " +
                          std::to_string(vals.size()));
        const Eigen::Matrix4d lidar = tr_inv * matrix_from_12(vals) * tr;
        poses.push_back(PoseSE3::from_matrix(lidar).orthonormalized());
    }
    return poses;
}

void write_scan(const std::filesystem::path& path, const LabeledCloud& cloud) {
    std::vector<std::uint8_t> data;
    data.reserve(cloud.size() * 16);
    for (const auto& p : cloud.points) {
        put_f32_le(data, static_cast<float>(p.x));
        put_f32_le(data, static_cast<float>(p.y));
        put_f32_le(data, static_cast<float>(p.z));
        put_f32_le(data, 0.0f);  // reflectance
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write scan file: " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("short write on scan file: " + path.string());
}

void write_labels(const std::filesystem::path& path, const LabeledCloud& cloud) {
    std::vector<std::uint8_t> data;
    data.reserve(cloud.size() * 4);
    for (const auto& p : cloud.points) {
        const std::uint32_t code = class_code(p.label);
        data.push_back(static_cast<std::uint8_t>(code & 0xff));
        data.push_back(static_cast<std::uint8_t>((code >> 8) & 0xff));
        data.push_back(static_cast<std::uint8_t>((code >> 16) & 0xff));
        data.push_back(static_cast<std::uint8_t>((code >> 24) & 0xff));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write label file: " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("short write on label file: " + path.string());
}

void write_poses(const std::filesystem::path& path, const std::vector<PoseSE3>& poses) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write poses file: " + path.string());
    out.precision(12);
    for (const auto& pose : poses) {
        const Eigen::Matrix4d m = pose.matrix();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 4; ++c)
                out << m(r, c) << (r == 2 && c == 3 ? '\n' : ' ');
    }
}

void write_identity_calib(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write calib file: " + path.string());
    out << "Tr: 1 0 0 0 0 1 0 0 0 0 1 0\n";
}

SequenceIndex index_sequence(const std::filesystem::path& root, const std::string& sequence) {
    namespace fs = std::filesystem;
    const fs::path seq_dir = root / "sequences" / sequence;
    const fs::path velo_dir = seq_dir / "velodyne";
    const fs::path label_dir = seq_dir / "labels";
    if (!fs::is_directory(velo_dir))
        throw IoError("no velodyne directory at " + velo_dir.string());

    SequenceIndex index;
    for (const auto& entry : fs::directory_iterator(velo_dir))
        if (entry.path().extension() == ".bin") index.scans.push_back(entry.path());
    std::sort(index.scans.begin(), index.scans.end());

    for (const auto& scan : index.scans) {
        fs::path label = label_dir / scan.filename();
        label.replace_extension(".label");
        if (!fs::exists(label)) throw IoError("missing label file " + label.string());
        index.labels.push_back(label);
    }

    fs::path poses_path = seq_dir / "poses.txt";
    if (!fs::exists(poses_path)) poses_path = root / "poses" / (sequence + ".txt");
    if (!fs::exists(poses_path))
        throw IoError("no poses file for sequence " + sequence + " under " + root.string());
    index.poses = load_poses(poses_path, seq_dir / "calib.txt");

    if (index.poses.size() != index.scans.size())
        throw IoError("sequence " + sequence + ": " + std::to_string(index.scans.size()) +
                      " scans but " + std::to_string(index.poses.size()) + " poses");
    return index;
}

}  // namespace ssc
