#include "spademl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <zlib.h>

#include "spademl/errors.hpp"
#include "spademl/rng.hpp"

namespace spademl {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw DataError("gzip: inflateInit failed");
    std::vector<std::uint8_t> out;
    std::uint8_t buf[1 << 16];
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    int ret = Z_OK;
    while (ret != Z_STREAM_END) {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw DataError("gzip: corrupt stream");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    }
    inflateEnd(&zs);
    return out;
}

bool is_gzip(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

} // namespace

std::vector<std::uint8_t> read_file_maybe_gzip(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
    if (is_gzip(bytes)) return gunzip(bytes);
    return bytes;
}

std::pair<RawImageSet, LabelSet> parse_idx(std::span<const std::uint8_t> image_bytes,
                                           std::span<const std::uint8_t> label_bytes) {
    std::vector<std::uint8_t> img_buf, lbl_buf;
    if (is_gzip(image_bytes)) {
        img_buf = gunzip(image_bytes);
        image_bytes = img_buf;
    }
    if (is_gzip(label_bytes)) {
        lbl_buf = gunzip(label_bytes);
        label_bytes = lbl_buf;
    }

    if (image_bytes.size() < 16)
        throw DataError("idx images: truncated header");
    if (read_be32(image_bytes, 0) != kImageMagic)
        throw DataError("idx images: bad magic number");
    RawImageSet images;
    images.count = read_be32(image_bytes, 4);
    images.rows = read_be32(image_bytes, 8);
    images.cols = read_be32(image_bytes, 12);
    const std::size_t payload =
        static_cast<std::size_t>(images.count) * images.rows * images.cols;
    if (image_bytes.size() != 16 + payload)
        throw DataError("idx images: truncated payload");
    images.pixels.assign(image_bytes.begin() + 16, image_bytes.end());

    if (label_bytes.size() < 8)
        throw DataError("idx labels: truncated header");
    if (read_be32(label_bytes, 0) != kLabelMagic)
        throw DataError("idx labels: bad magic number");
    LabelSet labels;
    labels.count = read_be32(label_bytes, 4);
    if (label_bytes.size() != 8 + labels.count)
        throw DataError("idx labels: truncated payload");
    labels.labels.assign(label_bytes.begin() + 8, label_bytes.end());

    if (images.count != labels.count)
        throw DataError("idx: image/label count mismatch");
    return {std::move(images), std::move(labels)};
}

std::pair<RawImageSet, LabelSet> parse_idx_files(const std::string& image_path,
                                                 const std::string& label_path) {
    auto img = read_file_maybe_gzip(image_path);
    auto lbl = read_file_maybe_gzip(label_path);
    return parse_idx(img, lbl);
}

std::vector<std::uint8_t> write_idx_images(const RawImageSet& images) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + images.pixels.size());
    write_be32(out, kImageMagic);
    write_be32(out, images.count);
    write_be32(out, images.rows);
    write_be32(out, images.cols);
    out.insert(out.end(), images.pixels.begin(), images.pixels.end());
    return out;
}

std::vector<std::uint8_t> write_idx_labels(const LabelSet& labels) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.labels.size());
    write_be32(out, kLabelMagic);
    write_be32(out, labels.count);
    out.insert(out.end(), labels.labels.begin(), labels.labels.end());
    return out;
}

LabeledSubset select_classes(const RawImageSet& images, const LabelSet& labels,
                             const std::set<int>& classes,
                             std::uint64_t cap_per_class, std::uint64_t seed) {
    if (classes.empty()) throw DataError("select_classes: empty class set");

    LabeledSubset out;
    out.images.rows = images.rows;
    out.images.cols = images.cols;
    const std::size_t n = static_cast<std::size_t>(images.rows) * images.cols;

    for (int c : classes) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.labels.size(); ++i)
            if (labels.labels[i] == c) idx.push_back(i);
        if (idx.empty())
            throw DataError("select_classes: class " + std::to_string(c) +
                            " absent from data");
        if (idx.size() > cap_per_class) {
            // seeded Fisher-Yates prefix, then restore index order
            Rng rng(derive_seed(seed, "select_classes", static_cast<std::uint64_t>(c)));
            for (std::size_t i = 0; i < cap_per_class; ++i) {
                std::size_t j = i + rng.next_below(idx.size() - i);
                std::swap(idx[i], idx[j]);
            }
            idx.resize(cap_per_class);
            std::sort(idx.begin(), idx.end());
        }
        for (std::size_t i : idx) {
            auto img = images.image(i);
            out.images.pixels.insert(out.images.pixels.end(), img.begin(), img.end());
            out.labels.labels.push_back(labels.labels[i]);
            out.original_indices.push_back(i);
        }
    }
    out.images.count = static_cast<std::uint32_t>(out.labels.labels.size());
    out.labels.count = out.images.count;
    (void)n;
    return out;
}

SourceObject to_source_object(std::span<const std::uint8_t> image,
                              std::uint32_t rows, std::uint32_t cols) {
    double total = 0.0;
    for (std::uint8_t p : image) total += p;
    if (total == 0.0) throw DataError("to_source_object: all-zero image");

    SourceObject src;
    src.samples.reserve(image.size() / 4);
    double cx = 0.0, cy = 0.0;
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            const std::uint8_t p = image[static_cast<std::size_t>(r) * cols + c];
            if (p == 0) continue;
            const double w = p / total;
            src.samples.push_back({static_cast<double>(c), static_cast<double>(r), w});
            cx += w * c;
            cy += w * r;
        }
    }
    for (auto& s : src.samples) {
        s.x -= cx;
        s.y -= cy;
    }
    return src;
}

} // namespace spademl
