#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "tcl/data.hpp"
#include "tcl/error.hpp"

using namespace tcl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tcl_test_data";
    fs::create_directories(dir);
    return dir / name;
}

void writeBytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

// Two 2x2 grayscale images and their labels, byte for byte.
const std::vector<std::uint8_t> kImages{0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2,
                                        0, 255, 51, 102, 255, 0, 204, 153};
const std::vector<std::uint8_t> kLabels{0, 0, 8, 1, 0, 0, 0, 2, 1, 0};

}  // namespace

TEST_CASE("hand-built idx pair") {
    writeBytes(scratch("img"), kImages);
    writeBytes(scratch("lbl"), kLabels);
    const Dataset d = loadIdx(scratch("img").string(), scratch("lbl").string());
    CHECK(d.images.shape() == Shape{2, 1, 2, 2});
    CHECK(d.images.values() == std::vector<double>{0.0, 1.0, 0.2, 0.4, 1.0, 0.0, 0.8, 0.6});
    CHECK(d.labels == std::vector<int>{1, 0});
    CHECK(d.numClasses == 2u);
}

TEST_CASE("idx errors") {
    writeBytes(scratch("img"), kImages);
    writeBytes(scratch("lbl3"), {0, 0, 8, 1, 0, 0, 0, 3, 1, 0, 1});
    CHECK_THROWS_AS(loadIdx(scratch("img").string(), scratch("lbl3").string()), ConsistencyError);
    writeBytes(scratch("empty"), {});
    CHECK_THROWS_AS(loadIdx(scratch("empty").string(), scratch("lbl3").string()), IoError);
    CHECK_THROWS_AS(loadIdx(scratch("missing-file").string(), scratch("lbl3").string()), IoError);

    auto bad = kImages;
    bad[0] = 1;
    CHECK_THROWS_AS(parseIdx(bad, "x"), FormatError);
    bad = kImages;
    bad[2] = 0x0D;  // float payloads are not supported
    CHECK_THROWS_AS(parseIdx(bad, "x"), FormatError);
    bad = kImages;
    bad.pop_back();
    CHECK_THROWS_AS(parseIdx(bad, "x"), IoError);
    bad = kImages;
    bad.push_back(0);
    CHECK_THROWS_AS(parseIdx(bad, "x"), FormatError);
    CHECK_THROWS_AS(parseIdx({0, 0, 8}, "x"), IoError);
    CHECK_THROWS_AS(parseIdx({0, 0, 8, 0}, "x"), FormatError);
    CHECK_THROWS_AS(parseIdx({0, 0, 8, 2, 255, 255, 255, 255, 255, 255, 255, 255, 1}, "x"), IoError);
}

TEST_CASE("idx fuzz corpus never crashes") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> byte(0, 255);
    std::size_t accepted = 0, rejected = 0;
    for (int i = 0; i < 5000; ++i) {
        std::vector<std::uint8_t> b = (i % 2) ? kImages : kLabels;
        const int edits = 1 + i % 4;
        for (int e = 0; e < edits; ++e) {
            const std::size_t pos = static_cast<std::size_t>(byte(rng)) % (b.size() + 1);
            switch (byte(rng) % 3) {
                case 0:
                    if (pos < b.size()) b[pos] = static_cast<std::uint8_t>(byte(rng));
                    break;
                case 1:
                    b.resize(pos);
                    break;
                default:
                    b.insert(b.begin() + static_cast<std::ptrdiff_t>(pos), static_cast<std::uint8_t>(byte(rng)));
            }
        }
        try {
            const IdxArray a = parseIdx(b, "fuzz");
            std::size_t n = 1;
            for (auto d : a.dims) n *= d;
            REQUIRE(n == a.values.size());
            ++accepted;
        } catch (const IoError&) {
            ++rejected;
        } catch (const FormatError&) {
            ++rejected;
        }
    }
    CHECK(rejected > 0);
    CHECK(accepted + rejected == 5000u);
}

TEST_CASE("idx writer roundtrip") {
    SynthSpec spec;
    spec.numSamples = 12;
    const Dataset d = synthDataset(spec);
    writeIdxImages(scratch("si").string(), d.images);
    writeIdxLabels(scratch("sl").string(), d.labels);
    const Dataset back = loadIdx(scratch("si").string(), scratch("sl").string());
    CHECK(back.labels == d.labels);
    CHECK(back.images.shape() == d.images.shape());
    CHECK(maxAbsDiff(back.images, d.images) <= 0.5 / 255.0 + 1e-12);
}

TEST_CASE("synthetic dataset is deterministic") {
    SynthSpec spec;
    spec.seed = 42;
    const Dataset a = synthDataset(spec), b = synthDataset(spec);
    CHECK(a.images == b.images);
    CHECK(a.labels == b.labels);
    CHECK(!(synthDataset(spec, "test").images == a.images));
    spec.seed = 43;
    CHECK(!(synthDataset(spec).images == a.images));
    CHECK(a.images.shape() == Shape{200, 3, 8, 8});
    for (double v : a.images.values()) REQUIRE((v >= 0.0 && v <= 1.0));
    validateDataset(a);
}

TEST_CASE("noise-free samples equal their templates") {
    SynthSpec spec;
    spec.noise = 0.0;
    spec.numSamples = 30;
    const Dataset d = synthDataset(spec);
    const auto templates = synthTemplates(spec);
    const std::size_t per = 3 * 8 * 8;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& t = templates[static_cast<std::size_t>(d.labels[i])];
        for (std::size_t j = 0; j < per; ++j) REQUIRE(d.images[i * per + j] == t[j]);
    }
}

TEST_CASE("nearest-template oracle separates the classes") {
    SynthSpec spec;
    spec.numSamples = 60;
    const Dataset test = synthDataset(spec, "test");
    const auto templates = synthTemplates(spec);
    const std::size_t per = 3 * 8 * 8;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        double best = 1e300;
        int arg = -1;
        for (std::size_t k = 0; k < templates.size(); ++k) {
            double dist = 0;
            for (std::size_t j = 0; j < per; ++j) {
                const double diff = test.images[i * per + j] - templates[k][j];
                dist += diff * diff;
            }
            if (dist < best) best = dist, arg = static_cast<int>(k);
        }
        hits += arg == test.labels[i];
    }
    CHECK(static_cast<double>(hits) / static_cast<double>(test.size()) >= 0.95);
}

TEST_CASE("dataset validation and normalization") {
    SynthSpec spec;
    spec.numSamples = 9;
    Dataset d = synthDataset(spec);
    const Dataset n = normalized(d, computeChannelStats(d.images));
    const ChannelStats s = computeChannelStats(n.images);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(std::abs(s.mean[c]) < 1e-12);
        CHECK(s.stddev[c] == doctest::Approx(1.0).epsilon(1e-12));
    }
    d.labels[0] = 3;
    CHECK_THROWS_AS(validateDataset(d), ConsistencyError);
    d.labels.pop_back();
    CHECK_THROWS_AS(validateDataset(d), ConsistencyError);
}
