#include "tcl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tcl/error.hpp"

namespace tcl {

std::size_t shapeSize(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shapeToString(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

namespace {

void checkShape(const Shape& shape) {
    if (shape.empty()) throw ShapeError("tensor order must be at least 1");
    for (auto d : shape) {
        if (d == 0) throw ShapeError("zero-sized mode in shape " + shapeToString(shape));
    }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    checkShape(shape_);
    data_.assign(shapeSize(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    checkShape(shape_);
    if (data_.size() != shapeSize(shape_)) {
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         shapeToString(shape_));
    }
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
    return t;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("ragged matrix literal");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
}

std::size_t Tensor::offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw ShapeError("index order does not match tensor order");
    std::size_t off = 0;
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] >= shape_[k]) throw ShapeError("index out of range on axis " + std::to_string(k));
        off = off * shape_[k] + index[k];
    }
    return off;
}

double& Tensor::at(std::span<const std::size_t> index) { return data_[offset(index)]; }
double Tensor::at(std::span<const std::size_t> index) const { return data_[offset(index)]; }

Tensor Tensor::reshaped(Shape shape) const {
    if (shapeSize(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + shapeToString(shape_) + " to " + shapeToString(shape));
    }
    return Tensor(std::move(shape), data_);
}

Tensor UnfoldedMatrix::asMatrix() const { return Tensor({rows, cols}, data); }

namespace {

// Sizes of the modes before, at, and after `mode` (1-based).
struct Split {
    std::size_t outer;
    std::size_t middle;
    std::size_t inner;
};

Split splitAt(const Shape& shape, std::size_t mode) {
    if (mode < 1 || mode > shape.size()) {
        throw InvalidModeError("mode " + std::to_string(mode) + " out of range for order-" +
                               std::to_string(shape.size()) + " tensor");
    }
    Split s{1, shape[mode - 1], 1};
    for (std::size_t k = 0; k + 1 < mode; ++k) s.outer *= shape[k];
    for (std::size_t k = mode; k < shape.size(); ++k) s.inner *= shape[k];
    return s;
}

}  // namespace

UnfoldedMatrix unfold(const Tensor& x, std::size_t mode) {
    const Split s = splitAt(x.shape(), mode);
    UnfoldedMatrix m;
    m.rows = s.middle;
    m.cols = s.outer * s.inner;
    m.mode = mode;
    m.sourceShape = x.shape();
    m.data.resize(x.size());
    const auto src = x.data();
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t d = 0; d < s.middle; ++d) {
            const double* from = src.data() + (o * s.middle + d) * s.inner;
            std::copy(from, from + s.inner, m.data.data() + d * m.cols + o * s.inner);
        }
    }
    return m;
}

Tensor fold(const UnfoldedMatrix& m) {
    const Split s = splitAt(m.sourceShape, m.mode);
    if (m.rows != s.middle || m.cols != s.outer * s.inner || m.data.size() != m.rows * m.cols) {
        throw ShapeError("unfolded matrix " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                         " inconsistent with source shape " + shapeToString(m.sourceShape) + " mode " +
                         std::to_string(m.mode));
    }
    Tensor x(m.sourceShape);
    auto dst = x.data();
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t d = 0; d < s.middle; ++d) {
            const double* from = m.data.data() + d * m.cols + o * s.inner;
            std::copy(from, from + s.inner, dst.data() + (o * s.middle + d) * s.inner);
        }
    }
    return x;
}

Tensor matmul(const Tensor& a, const Tensor& b, MacCounter* macs) {
    if (a.order() != 2 || b.order() != 2) throw ShapeError("matmul expects matrices");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul inner dimensions differ: " + shapeToString(a.shape()) + " * " +
                         shapeToString(b.shape()));
    }
    Tensor c({m, n});
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* pc = c.data().data();
    std::uint64_t executed = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = pc + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            const double* brow = pb + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            executed += n;
        }
    }
    if (macs) macs->count += executed;
    return c;
}

Tensor transpose(const Tensor& m) {
    if (m.order() != 2) throw ShapeError("transpose expects a matrix");
    const std::size_t r = m.dim(0), c = m.dim(1);
    Tensor t({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) t[j * r + i] = m[i * c + j];
    return t;
}

Tensor modeProduct(const Tensor& x, const Tensor& m, std::size_t mode, MacCounter* macs) {
    if (m.order() != 2) throw ShapeError("mode product factor must be a matrix");
    if (mode < 1 || mode > x.order()) {
        throw InvalidModeError("mode " + std::to_string(mode) + " out of range for order-" +
                               std::to_string(x.order()) + " tensor");
    }
    if (m.dim(1) != x.dim(mode - 1)) {
        throw ShapeError("mode-" + std::to_string(mode) + " product: factor " + shapeToString(m.shape()) +
                         " does not match dimension " + std::to_string(x.dim(mode - 1)));
    }
    const UnfoldedMatrix xu = unfold(x, mode);
    const Tensor prod = matmul(m, xu.asMatrix(), macs);
    UnfoldedMatrix out;
    out.rows = m.dim(0);
    out.cols = xu.cols;
    out.mode = mode;
    out.sourceShape = x.shape();
    out.sourceShape[mode - 1] = m.dim(0);
    out.data = prod.values();
    return fold(out);
}

Tensor kronecker(const Tensor& a, const Tensor& b) {
    if (a.order() != 2 || b.order() != 2) throw ShapeError("kronecker expects matrices");
    const std::size_t ar = a.dim(0), ac = a.dim(1), br = b.dim(0), bc = b.dim(1);
    Tensor k({ar * br, ac * bc});
    const std::size_t cols = ac * bc;
    for (std::size_t i = 0; i < ar; ++i)
        for (std::size_t j = 0; j < ac; ++j) {
            const double av = a[i * ac + j];
            for (std::size_t p = 0; p < br; ++p)
                for (std::size_t q = 0; q < bc; ++q) k[(i * br + p) * cols + j * bc + q] = av * b[p * bc + q];
        }
    return k;
}

FactorSet::FactorSet(Shape inputShape, std::vector<std::optional<Tensor>> factors)
    : inputShape_(std::move(inputShape)), factors_(std::move(factors)) {
    if (factors_.size() != inputShape_.size()) {
        throw ShapeError("factor set has " + std::to_string(factors_.size()) + " entries for order-" +
                         std::to_string(inputShape_.size()) + " input");
    }
    for (std::size_t k = 0; k < factors_.size(); ++k) {
        if (!factors_[k]) continue;
        const Tensor& f = *factors_[k];
        if (f.order() != 2 || f.dim(1) != inputShape_[k]) {
            throw ShapeError("factor for mode " + std::to_string(k + 1) + " has shape " +
                             shapeToString(f.shape()) + ", expected (R, " + std::to_string(inputShape_[k]) +
                             ")");
        }
    }
}

Shape FactorSet::outputShape() const {
    Shape out = inputShape_;
    for (std::size_t k = 0; k < factors_.size(); ++k)
        if (factors_[k]) out[k] = factors_[k]->dim(0);
    return out;
}

const Tensor& FactorSet::factor(std::size_t mode) const {
    if (skipped(mode)) throw InvalidModeError("mode " + std::to_string(mode) + " is skipped");
    return *factors_[mode - 1];
}

Tensor& FactorSet::factor(std::size_t mode) {
    if (skipped(mode)) throw InvalidModeError("mode " + std::to_string(mode) + " is skipped");
    return *factors_[mode - 1];
}

Tensor FactorSet::factorOrIdentity(std::size_t mode) const {
    return skipped(mode) ? Tensor::identity(inputShape_.at(mode - 1)) : *factors_[mode - 1];
}

std::size_t FactorSet::parameterCount() const {
    std::size_t n = 0;
    for (const auto& f : factors_)
        if (f) n += f->size();
    return n;
}

Tensor multiModeProduct(const Tensor& x, const FactorSet& factors, MacCounter* macs) {
    std::vector<std::size_t> order(factors.order());
    std::iota(order.begin(), order.end(), std::size_t{1});
    return multiModeProduct(x, factors, order, macs);
}

Tensor multiModeProduct(const Tensor& x, const FactorSet& factors, std::span<const std::size_t> order,
                        MacCounter* macs) {
    if (x.shape() != factors.inputShape()) {
        throw ShapeError("tensor shape " + shapeToString(x.shape()) + " does not match factor set input " +
                         shapeToString(factors.inputShape()));
    }
    std::vector<bool> seen(factors.order(), false);
    if (order.size() != factors.order()) throw InvalidModeError("application order is not a permutation");
    for (auto mode : order) {
        if (mode < 1 || mode > factors.order() || seen[mode - 1])
            throw InvalidModeError("application order is not a permutation");
        seen[mode - 1] = true;
    }
    Tensor g = x;
    for (auto mode : order) {
        if (!factors.skipped(mode)) g = modeProduct(g, factors.factor(mode), mode, macs);
    }
    return g;
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw ShapeError("elementwise shape mismatch");
    Tensor r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw ShapeError("elementwise shape mismatch");
    Tensor r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

Tensor operator*(double s, const Tensor& a) {
    Tensor r = a;
    for (auto& v : r.data()) v *= s;
    return r;
}

double dot(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw ShapeError("dot size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double maxAbsDiff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw ShapeError("comparison shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double maxAbs(const Tensor& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace tcl
