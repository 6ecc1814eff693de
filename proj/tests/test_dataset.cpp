#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "spademl/dataset.hpp"
#include "spademl/errors.hpp"

using namespace spademl;

namespace {

std::vector<std::uint8_t> image_header(std::uint32_t count, std::uint32_t rows,
                                       std::uint32_t cols) {
    std::vector<std::uint8_t> b;
    auto be32 = [&](std::uint32_t v) {
        b.push_back(v >> 24);
        b.push_back(v >> 16);
        b.push_back(v >> 8);
        b.push_back(v);
    };
    be32(0x00000803);
    be32(count);
    be32(rows);
    be32(cols);
    return b;
}

std::vector<std::uint8_t> label_bytes(const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> b;
    auto be32 = [&](std::uint32_t v) {
        b.push_back(v >> 24);
        b.push_back(v >> 16);
        b.push_back(v >> 8);
        b.push_back(v);
    };
    be32(0x00000801);
    be32(static_cast<std::uint32_t>(labels.size()));
    b.insert(b.end(), labels.begin(), labels.end());
    return b;
}

} // namespace

TEST_CASE("parse_idx decodes a zero image and a single label") {
    auto img = image_header(1, 28, 28);
    img.resize(img.size() + 784, 0);
    const auto lbl = label_bytes({7});

    const auto [images, labels] = parse_idx(img, lbl);
    CHECK(images.count == 1);
    CHECK(images.rows == 28);
    CHECK(images.cols == 28);
    for (std::uint8_t p : images.image(0)) CHECK(p == 0);
    CHECK(labels.count == 1);
    CHECK(labels.labels[0] == 7);
}

TEST_CASE("parse_idx reports distinct errors") {
    auto good_img = image_header(1, 2, 2);
    good_img.resize(good_img.size() + 4, 1);
    const auto good_lbl = label_bytes({3});

    SUBCASE("bad magic") {
        auto img = good_img;
        img[3] = 0x99;
        CHECK_THROWS_WITH_AS(parse_idx(img, good_lbl),
                             doctest::Contains("bad magic"), DataError);
    }
    SUBCASE("truncated payload") {
        auto img = good_img;
        img.pop_back();
        CHECK_THROWS_WITH_AS(parse_idx(img, good_lbl),
                             doctest::Contains("truncated"), DataError);
    }
    SUBCASE("count mismatch") {
        const auto lbl = label_bytes({3, 4});
        CHECK_THROWS_WITH_AS(parse_idx(good_img, lbl),
                             doctest::Contains("count mismatch"), DataError);
    }
}

TEST_CASE("idx round-trip preserves pixels and labels") {
    RawImageSet images;
    images.count = 3;
    images.rows = 4;
    images.cols = 5;
    for (std::size_t i = 0; i < 3 * 4 * 5; ++i)
        images.pixels.push_back(static_cast<std::uint8_t>((i * 37) % 256));
    LabelSet labels{3, {2, 9, 0}};

    const auto [rimg, rlbl] = parse_idx(write_idx_images(images), write_idx_labels(labels));
    CHECK(rimg.pixels == images.pixels);
    CHECK(rimg.rows == images.rows);
    CHECK(rimg.cols == images.cols);
    CHECK(rlbl.labels == labels.labels);
}

TEST_CASE("select_classes caps, filters and is seed-deterministic") {
    RawImageSet images;
    images.rows = 1;
    images.cols = 1;
    LabelSet labels;
    for (int i = 0; i < 60; ++i) {
        images.pixels.push_back(static_cast<std::uint8_t>(i));
        labels.labels.push_back(i % 3); // classes 0,1,2 x20
    }
    images.count = labels.count = 60;

    SUBCASE("cap semantics") {
        const auto sub = select_classes(images, labels, {2}, 10, 42);
        CHECK(sub.labels.labels.size() == 10);
        for (int l : sub.labels.labels) CHECK(l == 2);
    }
    SUBCASE("balanced cap over two classes") {
        const auto sub = select_classes(images, labels, {0, 1}, 15, 42);
        CHECK(sub.labels.labels.size() == 30);
    }
    SUBCASE("no cap is a pure filter") {
        const auto sub = select_classes(images, labels, {0, 1}, kNoCap, 42);
        CHECK(sub.labels.labels.size() == 40);
        CHECK(std::is_sorted(sub.original_indices.begin(),
                             sub.original_indices.end()) == false);
        // per-class blocks are index-sorted
    }
    SUBCASE("deterministic under a fixed seed") {
        const auto a = select_classes(images, labels, {0, 1, 2}, 7, 123);
        const auto b = select_classes(images, labels, {0, 1, 2}, 7, 123);
        CHECK(a.original_indices == b.original_indices);
        const auto c = select_classes(images, labels, {0, 1, 2}, 7, 124);
        CHECK(a.original_indices != c.original_indices);
    }
    SUBCASE("absent class") {
        CHECK_THROWS_AS(select_classes(images, labels, {5}, kNoCap, 0), DataError);
    }
}

TEST_CASE("to_source_object normalizes and centers") {
    SUBCASE("single pixel") {
        std::vector<std::uint8_t> img(28 * 28, 0);
        img[12 * 28 + 10] = 255;
        const auto src = to_source_object(img, 28, 28);
        REQUIRE(src.samples.size() == 1);
        CHECK(src.samples[0].w == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(src.samples[0].x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(src.samples[0].y == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("symmetric pair") {
        std::vector<std::uint8_t> img(3 * 3, 0);
        img[0] = 100; // (x=0, y=0)
        img[2] = 100; // (x=2, y=0)
        const auto src = to_source_object(img, 3, 3);
        REQUIRE(src.samples.size() == 2);
        CHECK(src.samples[0].w == doctest::Approx(0.5));
        CHECK(src.samples[0].x == doctest::Approx(-1.0));
        CHECK(src.samples[1].x == doctest::Approx(1.0));
        CHECK(src.samples[0].y == doctest::Approx(0.0));
    }
    SUBCASE("rescaling invariance") {
        std::vector<std::uint8_t> a(16, 0), b(16, 0);
        a[1] = 10;
        a[6] = 30;
        a[9] = 20;
        b[1] = 20;
        b[6] = 60;
        b[9] = 40;
        const auto sa = to_source_object(a, 4, 4);
        const auto sb = to_source_object(b, 4, 4);
        REQUIRE(sa.samples.size() == sb.samples.size());
        for (std::size_t i = 0; i < sa.samples.size(); ++i) {
            CHECK(sa.samples[i].w == doctest::Approx(sb.samples[i].w).epsilon(1e-14));
            CHECK(sa.samples[i].x == doctest::Approx(sb.samples[i].x).epsilon(1e-12));
        }
    }
    SUBCASE("all-zero image is an error") {
        std::vector<std::uint8_t> img(9, 0);
        CHECK_THROWS_AS(to_source_object(img, 3, 3), DataError);
    }
    SUBCASE("invariants on an arbitrary image") {
        std::vector<std::uint8_t> img(28 * 28);
        for (std::size_t i = 0; i < img.size(); ++i)
            img[i] = static_cast<std::uint8_t>((i * i) % 251);
        const auto src = to_source_object(img, 28, 28);
        double sw = 0, sx = 0, sy = 0;
        for (const auto& s : src.samples) {
            CHECK(s.w >= 0.0);
            sw += s.w;
            sx += s.w * s.x;
            sy += s.w * s.y;
        }
        CHECK(sw == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(sx) < 1e-9);
        CHECK(std::abs(sy) < 1e-9);
    }
}

#include <zlib.h>

TEST_CASE("gzip-compressed idx input is accepted transparently") {
    RawImageSet images;
    images.count = 2;
    images.rows = 3;
    images.cols = 3;
    images.pixels.assign(18, 42);
    LabelSet labels{2, {1, 4}};
    const auto raw_img = write_idx_images(images);
    const auto raw_lbl = write_idx_labels(labels);

    auto gzip_compress = [](const std::vector<std::uint8_t>& in) {
        std::vector<std::uint8_t> out(compressBound(in.size()) + 32);
        z_stream zs{};
        REQUIRE(deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8,
                             Z_DEFAULT_STRATEGY) == Z_OK);
        zs.next_in = const_cast<Bytef*>(in.data());
        zs.avail_in = static_cast<uInt>(in.size());
        zs.next_out = out.data();
        zs.avail_out = static_cast<uInt>(out.size());
        REQUIRE(deflate(&zs, Z_FINISH) == Z_STREAM_END);
        out.resize(zs.total_out);
        deflateEnd(&zs);
        return out;
    };

    const auto [rimg, rlbl] = parse_idx(gzip_compress(raw_img), gzip_compress(raw_lbl));
    CHECK(rimg.pixels == images.pixels);
    CHECK(rlbl.labels == labels.labels);
}

// Official MNIST header checks run only when the real files are present.
TEST_CASE("official MNIST headers" * doctest::skip(std::getenv("MNIST_DIR") == nullptr)) {
    const std::string dir = std::getenv("MNIST_DIR");
    const auto [images, labels] = parse_idx_files(dir + "/train-images-idx3-ubyte",
                                                  dir + "/train-labels-idx1-ubyte");
    CHECK(images.count == 60000);
    CHECK(images.rows == 28);
    CHECK(images.cols == 28);
    const auto zeros_ones = select_classes(images, labels, {0, 1}, kNoCap, 0);
    CHECK(zeros_ones.labels.labels.size() == 12665);
}
