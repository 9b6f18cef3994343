#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "ssc/semantics.hpp"

namespace ssc {

struct SscParams {
    int ns = 360;        ///< azimuth sectors (descriptor columns)
    int nr = 50;         ///< radial rings (descriptor rows)
    double rmax = 50.0;  ///< meters; points at r >= rmax are dropped

    void validate() const;
};

/// 1-based block coordinates, matching the descriptor's ring/sector grid.
struct BlockIndex {
    int ring = 0;    ///< in [1, nr]
    int sector = 0;  ///< in [1, ns]
};

/// Maps a polar point to its descriptor block, or nullopt when r >= rmax.
/// phi must lie in [-pi, pi).
std::optional<BlockIndex> block_index(double r, double phi, const SscParams& params);

/// nr x ns grid of semantic class codes, row-major by ring; 0 marks an empty
/// block. The height-encoding variant stores z bins 1..20 instead.
class SscDescriptor {
public:
    SscDescriptor() = default;
    explicit SscDescriptor(const SscParams& params);

    const SscParams& params() const { return params_; }
    int rings() const { return params_.nr; }
    int sectors() const { return params_.ns; }

    /// 0-based cell access.
    std::uint8_t cell(int ring, int sector) const {
        return grid_[static_cast<std::size_t>(ring) * params_.ns + sector];
    }
    void set_cell(int ring, int sector, std::uint8_t code) {
        grid_[static_cast<std::size_t>(ring) * params_.ns + sector] = code;
    }

    const std::vector<std::uint8_t>& grid() const { return grid_; }
    std::size_t nonzero_count() const;

private:
    SscParams params_;
    std::vector<std::uint8_t> grid_;
};

/// Encodes a cloud: each block keeps the class of maximal priority among its
/// points. `unlabeled` points and points at r >= rmax are excluded; empty
/// blocks read 0.
SscDescriptor encode(const LabeledCloud& cloud, const SscParams& params,
                     const PriorityTable& priority);

/// Height-encoding variant: each block keeps the maximum z over all points
/// (labels ignored), quantized into 20 uniform bins over [-4, 12] m.
SscDescriptor encode_max_height(const LabeledCloud& cloud, const SscParams& params);

struct SimilarityDetail {
    double score = 0.0;
    long matching = 0;  ///< cells equal and not both zero
    long occupied = 0;  ///< cells nonzero in either descriptor
};

/// Indicator similarity: matching cells over cells occupied in either
/// descriptor. Both-empty descriptors score 0. Throws ShapeError on a
/// dimension mismatch.
double similarity(const SscDescriptor& s1, const SscDescriptor& s2);
SimilarityDetail similarity_detail(const SscDescriptor& s1, const SscDescriptor& s2);

/// Returns a copy with every column j moved to (j + offset) mod ns.
SscDescriptor shift_columns(const SscDescriptor& desc, int offset);

/// Binary layout: u32 ns, u32 nr (little endian), then nr*ns code bytes
/// row-major by ring.
void save_descriptor(const std::filesystem::path& path, const SscDescriptor& desc);
SscDescriptor load_descriptor(const std::filesystem::path& path);

/// Lossless CSV: one row per ring, ns integer codes per row.
void export_descriptor_csv(const std::filesystem::path& path, const SscDescriptor& desc);

}  // namespace ssc
