#ifndef SPADEML_DATASET_HPP
#define SPADEML_DATASET_HPP

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace spademl {

// Decoded IDX image file: count images of rows x cols unsigned bytes,
// row-major.
struct RawImageSet {
    std::uint32_t count = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint8_t> pixels;

    std::span<const std::uint8_t> image(std::size_t i) const {
        const std::size_t n = static_cast<std::size_t>(rows) * cols;
        return {pixels.data() + i * n, n};
    }
};

struct LabelSet {
    std::uint32_t count = 0;
    std::vector<std::uint8_t> labels;
};

// A normalized, centroid-centered intensity distribution. Coordinates
// are pixel centers in original pixel units, shifted so the intensity
// centroid sits at (0, 0). Zero-weight pixels are dropped.
struct SourceObject {
    struct Sample {
        double x;
        double y;
        double w;
    };
    std::vector<Sample> samples;
    std::size_t source_index = 0;
    int label = -1;
};

// IDX decoding. Errors (bad magic, truncated payload, count mismatch)
// raise DataError with distinct messages. Gzip input is accepted.
std::pair<RawImageSet, LabelSet> parse_idx(std::span<const std::uint8_t> image_bytes,
                                           std::span<const std::uint8_t> label_bytes);
std::pair<RawImageSet, LabelSet> parse_idx_files(const std::string& image_path,
                                                 const std::string& label_path);

std::vector<std::uint8_t> write_idx_images(const RawImageSet& images);
std::vector<std::uint8_t> write_idx_labels(const LabelSet& labels);

// Raw bytes of a file, transparently gunzipped when the gzip magic is seen.
std::vector<std::uint8_t> read_file_maybe_gzip(const std::string& path);

struct LabeledSubset {
    RawImageSet images;
    LabelSet labels;
    std::vector<std::size_t> original_indices;
};

// Keep only the requested classes; with a cap, subsample each class to
// cap entries uniformly without replacement (seeded, deterministic).
LabeledSubset select_classes(const RawImageSet& images, const LabelSet& labels,
                             const std::set<int>& classes,
                             std::uint64_t cap_per_class, std::uint64_t seed);

constexpr std::uint64_t kNoCap = UINT64_MAX;

SourceObject to_source_object(std::span<const std::uint8_t> image,
                              std::uint32_t rows, std::uint32_t cols);

} // namespace spademl

#endif
