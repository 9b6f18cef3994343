#include "ssc/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "ssc/errors.hpp"
#include "ssc/projection.hpp"

namespace ssc {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kHeightMin = -4.0;
constexpr double kHeightMax = 12.0;
constexpr int kHeightBins = 20;

void write_u32_le(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {
        static_cast<char>(v & 0xff),
        static_cast<char>((v >> 8) & 0xff),
        static_cast<char>((v >> 16) & 0xff),
        static_cast<char>((v >> 24) & 0xff),
    };
    out.write(bytes, 4);
}

std::uint32_t read_u32_le(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}
}  // namespace

void SscParams::validate() const {
    if (ns < 1) throw Error("SscParams: ns must be >= 1");
    if (nr < 1) throw Error("SscParams: nr must be >= 1");
    if (!(rmax > 0.0)) throw Error("SscParams: rmax must be > 0");
}

SscDescriptor::SscDescriptor(const SscParams& params) : params_(params) {
    params_.validate();
    grid_.assign(static_cast<std::size_t>(params_.nr) * params_.ns, 0);
}

std::size_t SscDescriptor::nonzero_count() const {
    return static_cast<std::size_t>(
        std::count_if(grid_.begin(), grid_.end(), [](std::uint8_t c) { return c != 0; }));
}

std::optional<BlockIndex> block_index(double r, double phi, const SscParams& params) {
    if (r < 0.0) throw Error("block_index: negative radius");
    if (r >= params.rmax) return std::nullopt;
    int ring = static_cast<int>(std::floor(r * params.nr / params.rmax));
    ring = std::clamp(ring, 0, params.nr - 1);
    int sector = static_cast<int>(std::floor((phi + kPi) * params.ns / (2.0 * kPi)));
    sector = std::clamp(sector, 0, params.ns - 1);
    return BlockIndex{ring + 1, sector + 1};
}

SscDescriptor encode(const LabeledCloud& cloud, const SscParams& params,
                     const PriorityTable& priority) {
    SscDescriptor desc(params);
    std::vector<int> best_rank(static_cast<std::size_t>(params.nr) * params.ns, -1);
    for (const auto& p : cloud.points) {
        if (p.label == SemanticClass::kUnlabeled) continue;
        if (p.x == 0.0 && p.y == 0.0) continue;
        const PolarPoint polar = to_polar(p.x, p.y);
        const auto block = block_index(polar.r, polar.phi, params);
        if (!block) continue;
        const std::size_t idx =
            static_cast<std::size_t>(block->ring - 1) * params.ns + (block->sector - 1);
        const int rank = priority.rank(p.label);
        if (rank > best_rank[idx]) {
            best_rank[idx] = rank;
            desc.set_cell(block->ring - 1, block->sector - 1, class_code(p.label));
        }
    }
    return desc;
}

SscDescriptor encode_max_height(const LabeledCloud& cloud, const SscParams& params) {
    SscDescriptor desc(params);
    std::vector<double> max_z(static_cast<std::size_t>(params.nr) * params.ns,
                              -std::numeric_limits<double>::infinity());
    for (const auto& p : cloud.points) {
        if (p.x == 0.0 && p.y == 0.0) continue;
        const PolarPoint polar = to_polar(p.x, p.y);
        const auto block = block_index(polar.r, polar.phi, params);
        if (!block) continue;
        const std::size_t idx =
            static_cast<std::size_t>(block->ring - 1) * params.ns + (block->sector - 1);
        max_z[idx] = std::max(max_z[idx], p.z);
    }
    for (int i = 0; i < params.nr; ++i) {
        for (int j = 0; j < params.ns; ++j) {
            const double z = max_z[static_cast<std::size_t>(i) * params.ns + j];
            if (!std::isfinite(z)) continue;
            const double clamped = std::clamp(z, kHeightMin, kHeightMax);
            int bin = 1 + static_cast<int>(std::floor((clamped - kHeightMin) /
                                                      (kHeightMax - kHeightMin) * kHeightBins));
            bin = std::clamp(bin, 1, kHeightBins);
            desc.set_cell(i, j, static_cast<std::uint8_t>(bin));
        }
    }
    return desc;
}

SimilarityDetail similarity_detail(const SscDescriptor& s1, const SscDescriptor& s2) {
    if (s1.rings() != s2.rings() || s1.sectors() != s2.sectors())
        throw ShapeError("similarity: descriptor dimensions differ");
    SimilarityDetail d;
    const auto& g1 = s1.grid();
    const auto& g2 = s2.grid();
    for (std::size_t i = 0; i < g1.size(); ++i) {
        const std::uint8_t a = g1[i];
        const std::uint8_t b = g2[i];
        if (a == 0 && b == 0) continue;
        ++d.occupied;
        if (a == b) ++d.matching;
    }
    d.score = d.occupied > 0 ? static_cast<double>(d.matching) / d.occupied : 0.0;
    return d;
}

double similarity(const SscDescriptor& s1, const SscDescriptor& s2) {
    return similarity_detail(s1, s2).score;
}

SscDescriptor shift_columns(const SscDescriptor& desc, int offset) {
    const int ns = desc.sectors();
    SscDescriptor out(desc.params());
    const int shift = ((offset % ns) + ns) % ns;
    for (int i = 0; i < desc.rings(); ++i)
        for (int j = 0; j < ns; ++j)
            out.set_cell(i, (j + shift) % ns, desc.cell(i, j));
    return out;
}

void save_descriptor(const std::filesystem::path& path, const SscDescriptor& desc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write descriptor file: " + path.string());
    write_u32_le(out, static_cast<std::uint32_t>(desc.sectors()));
    write_u32_le(out, static_cast<std::uint32_t>(desc.rings()));
    out.write(reinterpret_cast<const char*>(desc.grid().data()),
              static_cast<std::streamsize>(desc.grid().size()));
    if (!out) throw IoError("short write on descriptor file: " + path.string());
}

SscDescriptor load_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open descriptor file: " + path.string());
    SscParams params;
    params.ns = static_cast<int>(read_u32_le(in));
    params.nr = static_cast<int>(read_u32_le(in));
    if (!in) throw IoError("descriptor file too short: " + path.string());
    SscDescriptor desc(params);
    std::vector<char> buf(static_cast<std::size_t>(params.nr) * params.ns);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
        throw IoError("descriptor file truncated: " + path.string());
    for (int i = 0; i < params.nr; ++i)
        for (int j = 0; j < params.ns; ++j)
            desc.set_cell(i, j,
                          static_cast<std::uint8_t>(buf[static_cast<std::size_t>(i) * params.ns + j]));
    return desc;
}

void export_descriptor_csv(const std::filesystem::path& path, const SscDescriptor& desc) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write descriptor CSV: " + path.string());
    for (int i = 0; i < desc.rings(); ++i) {
        for (int j = 0; j < desc.sectors(); ++j) {
            if (j) out << ',';
            out << static_cast<int>(desc.cell(i, j));
        }
        out << '\n';
    }
}

}  // namespace ssc
