#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tcl/analysis.hpp"
#include "tcl/error.hpp"
#include "tcl/tensor.hpp"
#include "test_util.hpp"

using namespace tcl;
using tcl::testing::forEachIndex;
using tcl::testing::randomTensor;

namespace {

Count counted(const Shape& dims, const Shape& ranks, const std::vector<std::size_t>& order, std::mt19937_64& rng) {
    std::vector<std::optional<Tensor>> fs;
    for (std::size_t k = 0; k < dims.size(); ++k) fs.emplace_back(randomTensor({ranks[k], dims[k]}, rng));
    FactorSet factors(dims, std::move(fs));
    MacCounter macs;
    multiModeProduct(randomTensor(dims, rng), factors, order, &macs);
    return macs.count;
}

}  // namespace

TEST_CASE("parameter counts") {
    const Shape d{256, 7, 7};
    const Shape r{128, 5, 5};
    CHECK(tclParamCount(d, r) == 32838u);
    CHECK(tclParamCount(d, d) == 65634u);
    const Shape one{9};
    CHECK(tclParamCount(one, one) == 81u);
    CHECK(fcParamCount(d, 4096, false) == 51380224u);
    CHECK(fcParamCount(d, 4096, true) == 51380224u + 4096u);
    // Hidden blocks: two 4096-wide layers with biases.
    const Shape alex{9216}, vgg{25088}, hidden{4096};
    CHECK(fcParamCount(alex, 4096, true) + fcParamCount(hidden, 4096, true) == 54534144u);
    CHECK(fcParamCount(vgg, 4096, true) + fcParamCount(hidden, 4096, true) == 119545856u);
    const Shape bad{2, 3};
    CHECK_THROWS_AS(tclParamCount(d, bad), ShapeError);
}

TEST_CASE("flop examples") {
    const Shape d23{2, 3};
    CHECK(tclFlops(d23, d23) == 30u);
    const Shape d4{4}, r2{2};
    CHECK(tclFlops(d4, r2) == 8u);
    CHECK(fcFlops(d23, 6) == 36u);
    CHECK(fcFlops(d23, 1) == 6u);
    const Shape big{256, 7, 7};
    CHECK(fcFlops(big, 4096) == 51380224u);
    // 2*8*64 + 2*2*8*8 + 2*2*2*8
    const Shape d888{8, 8, 8}, r222{2, 2, 2};
    CHECK(tclFlops(d888, r222) == 1024u + 256u + 64u);
    const std::vector<std::size_t> badOrder{1, 1, 2};
    CHECK_THROWS_AS(tclFlops(d888, r222, badOrder), InvalidModeError);
}

TEST_CASE("flop model equals instrumented execution") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> rank(1, 8);
    std::size_t cases = 0;
    for (std::size_t order = 1; order <= 4; ++order) {
        forEachIndex(Shape(order, 8), [&](const std::vector<std::size_t>& idx) {
            Shape dims(order), ranks(order);
            for (std::size_t k = 0; k < order; ++k) dims[k] = idx[k] + 1, ranks[k] = rank(rng);
            std::vector<std::size_t> asc(order);
            std::iota(asc.begin(), asc.end(), 1);
            std::vector<std::size_t> perm = asc;
            std::shuffle(perm.begin(), perm.end(), rng);
            REQUIRE(counted(dims, ranks, asc, rng) == tclFlops(dims, ranks));
            REQUIRE(tclFlops(dims, ranks, asc) == tclFlops(dims, ranks));
            REQUIRE(counted(dims, ranks, perm, rng) == tclFlops(dims, ranks, perm));
            REQUIRE(tclFlopsMin(dims, ranks) <= tclFlops(dims, ranks));
            ++cases;
        });
    }
    CHECK(cases == 8u + 64u + 512u + 4096u);
}

TEST_CASE("size-preserving tcl is cheaper than fc of the same size") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        Shape d = tcl::testing::randomShape(rng, 2, 4, 16);
        for (auto& x : d) x += 2;  // every mode at least 3 wide
        const Count n = shapeSize(d);
        CHECK(tclFlops(d, d) < fcFlops(d, n));
        CHECK(tclParamCount(d, d) < fcParamCount(d, n, false));
    }
}

TEST_CASE("savings decompositions") {
    const CostReport base = analyze(preset("alexnet-cifar-baseline"));
    CHECK(base.fcBlockParams == 2304u * 4096u + 4096u * 4096u + 4096u * 100u);
    CHECK(base.fcBlockParams == 26624000u);
    const CostReport sub1 = analyze(preset("alexnet-cifar-sub1-256"));
    // 256*256 + 3*3 + 3*3 factor entries, then fc(4096) and the classifier
    CHECK(sub1.fcBlockParams == 65554u + 2304u * 4096u + 4096u * 100u);
    CHECK(sub1.fcBlockParams == 9912338u);
    CHECK(std::abs(100.0 * spaceSavings(base, sub1) - 62.77) < 0.005);
    const CostReport sub2 = analyze(preset("alexnet-cifar-sub2-256-256"));
    CHECK(sub2.fcBlockParams == 2u * 65554u + 2304u * 100u);
    CHECK(std::abs(100.0 * spaceSavings(base, sub2) - 98.64) < 0.005);
    CHECK(spaceSavings(base, base) == 0.0);
    CHECK(analyzeWithSavings(preset("alexnet-cifar-baseline")).spaceSavings.value() == 0.0);

    CostReport empty = base;
    empty.fcBlockParams = 0;
    CHECK_THROWS_AS(spaceSavings(empty, sub1), UndefinedBaselineError);
}

TEST_CASE("report totals are sums over layers") {
    for (const auto& name : presetNames()) {
        CAPTURE(name);
        const CostReport r = analyze(preset(name));
        Count p = 0, f = 0, b = 0;
        for (const auto& l : r.perLayer) p += l.params, f += l.flops, b += l.fcBlockParams;
        CHECK(p == r.totalParams);
        CHECK(f == r.totalFlops);
        CHECK(b == r.fcBlockParams);
    }
}

TEST_CASE("tables 1 and 2 match the published savings") {
    const std::vector<double> t1{0, -0.25, 43.28, 74.49, 62.77, 78.72, 90.25, 98.64, 99.22};
    const std::vector<double> t2{0, -0.73, 42.99, 74.35, 45.8, 69.16, 85.98, 97.27, 98.43};
    for (auto [id, expected] : {std::pair{1, t1}, std::pair{2, t2}}) {
        const TableReport t = reproduceTable(id);
        REQUIRE(t.rows.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CAPTURE(t.rows[i].label);
            CHECK(t.rows[i].published == expected[i]);
            CHECK(std::abs(t.rows[i].computed - expected[i]) <= 0.005);
        }
    }
}

TEST_CASE("table 3 under both shape readings") {
    const TableReport t = reproduceTable(3);
    REQUIRE(t.rows.size() == 8u);
    auto find = [&](const std::string& p) {
        auto it = std::find_if(t.rows.begin(), t.rows.end(), [&](const TableRow& r) { return r.preset == p; });
        REQUIRE(it != t.rows.end());
        return *it;
    };
    CHECK(std::abs(find("alexnet-imagenet-s6-added-256").computed - -0.11) <= 0.01);
    CHECK(std::abs(find("alexnet-imagenet-s5-sub1-256").computed - 35.49) <= 0.01);
    CHECK(std::abs(find("alexnet-imagenet-s5-added-200").computed - 35.36) <= 0.01);
    REQUIRE(!t.notes.empty());
    CHECK(formatTable(t).find("shape ambiguity") != std::string::npos);
    CHECK_THROWS_AS(reproduceTable(4), ConfigError);
}
