#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "tcl/error.hpp"
#include "tcl/tensor.hpp"
#include "test_util.hpp"

using namespace tcl;
using tcl::testing::forEachIndex;
using tcl::testing::iota;
using tcl::testing::randomShape;
using tcl::testing::randomTensor;

namespace {

// Independent index-mapping oracle for the unfolding convention: column
// e = sum_{k != n} d_k * prod_{m > k, m != n} D_m.
Tensor unfoldOracle(const Tensor& x, std::size_t mode) {
    const Shape& s = x.shape();
    const std::size_t cols = x.size() / s[mode - 1];
    Tensor m({s[mode - 1], cols});
    forEachIndex(s, [&](const std::vector<std::size_t>& idx) {
        std::size_t e = 0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (k == mode - 1) continue;
            std::size_t stride = 1;
            for (std::size_t j = k + 1; j < s.size(); ++j)
                if (j != mode - 1) stride *= s[j];
            e += idx[k] * stride;
        }
        m.at({idx[mode - 1], e}) = x.at(idx);
    });
    return m;
}

FactorSet randomFactors(const Shape& shape, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> rank(1, 4);
    std::vector<std::optional<Tensor>> fs;
    for (auto d : shape) fs.emplace_back(randomTensor({rank(rng), d}, rng));
    return FactorSet(shape, std::move(fs));
}

}  // namespace

TEST_CASE("unfold: vector unfolds to a column") {
    const Tensor v({3}, {1, 2, 3});
    const auto m = unfold(v, 1);
    CHECK(m.rows == 3);
    CHECK(m.cols == 1);
    CHECK(m.data == std::vector<double>{1, 2, 3});
}

TEST_CASE("unfold: 2x2x2 examples") {
    const Tensor x = iota({2, 2, 2});
    CHECK(unfold(x, 1).data == std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(unfold(x, 2).data == std::vector<double>{0, 1, 4, 5, 2, 3, 6, 7});
    CHECK(unfold(x, 3).asMatrix() == unfoldOracle(x, 3));
    CHECK(unfold(x, 1).asMatrix() == unfoldOracle(x, 1));
    CHECK(unfold(x, 2).asMatrix() == unfoldOracle(x, 2));
}

TEST_CASE("unfold: matches the index-mapping oracle on random shapes") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        const Tensor x = randomTensor(randomShape(rng, 1, 5, 5), rng);
        for (std::size_t n = 1; n <= x.order(); ++n) CHECK(unfold(x, n).asMatrix() == unfoldOracle(x, n));
    }
}

TEST_CASE("unfold: invalid mode") {
    const Tensor x = iota({2, 3});
    CHECK_THROWS_AS(unfold(x, 0), InvalidModeError);
    CHECK_THROWS_AS(unfold(x, 3), InvalidModeError);
}

TEST_CASE("fold inverts unfold") {
    const Tensor x = iota({2, 2, 2});
    CHECK(fold(unfold(x, 1)) == x);
    CHECK(fold(unfold(x, 2)) == x);

    std::mt19937_64 rng(3);
    const Tensor r = randomTensor({3, 4, 5}, rng);
    CHECK(fold(unfold(r, 3)) == r);
}

TEST_CASE("fold rejects inconsistent matrices") {
    auto m = unfold(iota({2, 3, 4}), 2);
    m.data.pop_back();
    CHECK_THROWS_AS(fold(m), ShapeError);
    auto m2 = unfold(iota({2, 3, 4}), 2);
    m2.sourceShape = {2, 3, 5};
    CHECK_THROWS_AS(fold(m2), ShapeError);
}

TEST_CASE("modeProduct examples") {
    const Tensor x = iota({2, 2, 2});
    CHECK(modeProduct(x, Tensor::identity(2), 1) == x);

    const Tensor y = modeProduct(x, Tensor::matrix({{1, 1}}), 1);
    CHECK(y.shape() == Shape{1, 2, 2});
    CHECK(y.values() == std::vector<double>{4, 6, 8, 10});
    CHECK(y == tcl::testing::modeProductOracle(x, Tensor::matrix({{1, 1}}), 1));
}

TEST_CASE("modeProduct matches the elementwise oracle") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 40; ++t) {
        const Tensor x = randomTensor(randomShape(rng, 1, 4, 5), rng);
        for (std::size_t n = 1; n <= x.order(); ++n) {
            const Tensor m = randomTensor({1 + rng() % 4, x.dim(n - 1)}, rng);
            CHECK(tcl::testing::relErr(modeProduct(x, m, n), tcl::testing::modeProductOracle(x, m, n)) < 1e-14);
        }
    }
}

TEST_CASE("modeProduct errors") {
    const Tensor x = iota({2, 3});
    CHECK_THROWS_AS(modeProduct(x, Tensor::identity(3), 1), ShapeError);
    CHECK_THROWS_AS(modeProduct(x, Tensor::identity(2), 3), InvalidModeError);
}

TEST_CASE("modeProduct commutes over distinct modes") {
    std::mt19937_64 rng(8);
    const Tensor x = randomTensor({3, 4, 5}, rng);
    const Tensor a = randomTensor({2, 3}, rng);
    const Tensor b = randomTensor({6, 4}, rng);
    const Tensor ab = modeProduct(modeProduct(x, a, 1), b, 2);
    const Tensor ba = modeProduct(modeProduct(x, b, 2), a, 1);
    CHECK(maxAbsDiff(ab, ba) < 1e-12);
}

TEST_CASE("kronecker") {
    CHECK(kronecker(Tensor::identity(2), Tensor::identity(3)) == Tensor::identity(6));
    CHECK(kronecker(Tensor::matrix({{1, 2}}), Tensor::matrix({{0, 1}})) == Tensor::matrix({{0, 1, 0, 2}}));

    std::mt19937_64 rng(2);
    const Tensor a = randomTensor({2, 3}, rng), b = randomTensor({3, 1}, rng), c = randomTensor({2, 2}, rng);
    const Tensor left = kronecker(kronecker(a, b), c);
    const Tensor right = kronecker(a, kronecker(b, c));
    CHECK(left.shape() == Shape{12, 6});
    CHECK(maxAbsDiff(left, right) < 1e-15);

    // direct definition
    const Tensor k = kronecker(a, b);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t p = 0; p < 3; ++p)
                CHECK(k.at({i * 3 + p, j}) == a.at({i, j}) * b.at({p, 0}));
}

TEST_CASE("multiModeProduct examples") {
    const Tensor x = iota({2, 3, 2});
    std::vector<std::optional<Tensor>> ids{Tensor::identity(2), Tensor::identity(3), std::nullopt};
    CHECK(multiModeProduct(x, FactorSet({2, 3, 2}, ids)) == x);

    const Tensor m = Tensor::matrix({{1, 2}, {3, 4}});
    std::vector<std::optional<Tensor>> sel{Tensor::matrix({{1, 0}}), Tensor::matrix({{0, 1}})};
    const Tensor g = multiModeProduct(m, FactorSet({2, 2}, sel));
    CHECK(g.shape() == Shape{1, 1});
    CHECK(g[0] == 2.0);
}

TEST_CASE("multiModeProduct shape errors name the mode") {
    std::vector<std::optional<Tensor>> bad{Tensor::identity(2), Tensor::identity(4)};
    try {
        FactorSet({2, 3}, bad);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("mode 2") != std::string::npos);
    }
    std::vector<std::optional<Tensor>> ok{Tensor::identity(2), Tensor::identity(3)};
    CHECK_THROWS_AS(multiModeProduct(iota({3, 2}), FactorSet({2, 3}, ok)), ShapeError);
}

TEST_CASE("matricized Tucker identity with Kronecker chain") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 20; ++t) {
        const Tensor x = randomTensor(randomShape(rng, 3, 4, 5), rng);
        const FactorSet fs = randomFactors(x.shape(), rng);
        const Tensor g = multiModeProduct(x, fs);
        for (std::size_t n = 1; n <= x.order(); ++n) {
            Tensor chain;
            for (std::size_t k = 1; k <= x.order(); ++k) {
                if (k == n) continue;
                chain = chain.empty() ? fs.factor(k) : kronecker(chain, fs.factor(k));
            }
            const Tensor rhs = matmul(matmul(fs.factor(n), unfold(x, n).asMatrix()), transpose(chain));
            CHECK(tcl::testing::relErr(unfold(g, n).asMatrix(), rhs) < 1e-10);
        }
    }
}

TEST_CASE("multiModeProduct is independent of application order") {
    std::mt19937_64 rng(23);
    const Tensor x = randomTensor({3, 4, 2, 3}, rng);
    const FactorSet fs = randomFactors(x.shape(), rng);
    const Tensor ref = multiModeProduct(x, fs);
    std::vector<std::size_t> order{1, 2, 3, 4};
    do {
        CHECK(maxAbsDiff(multiModeProduct(x, fs, order), ref) < 1e-12);
    } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("multiModeProduct is linear") {
    std::mt19937_64 rng(29);
    const Tensor x = randomTensor({3, 4, 5}, rng), y = randomTensor({3, 4, 5}, rng);
    const FactorSet fs = randomFactors(x.shape(), rng);
    const double a = 0.7, b = -1.3;
    const Tensor lhs = multiModeProduct(a * x + b * y, fs);
    const Tensor rhs = a * multiModeProduct(x, fs) + b * multiModeProduct(y, fs);
    CHECK(maxAbsDiff(lhs, rhs) < 1e-12);
}

TEST_CASE("roundtrip property over random shapes up to order 5") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 200; ++t) {
        const Tensor x = randomTensor(randomShape(rng, 1, 5, 6), rng);
        for (std::size_t n = 1; n <= x.order(); ++n) REQUIRE(fold(unfold(x, n)) == x);
    }
}

TEST_CASE("tensor construction invariants") {
    CHECK_THROWS_AS(Tensor(Shape{}), ShapeError);
    CHECK_THROWS_AS(Tensor(Shape{2, 0}), ShapeError);
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
    const Tensor x = iota({2, 3, 4});
    CHECK(x.offset(std::vector<std::size_t>{1, 2, 3}) == 1 * 12 + 2 * 4 + 3);
}
