#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tcl {

using Shape = std::vector<std::size_t>;

std::size_t shapeSize(const Shape& shape);
std::string shapeToString(const Shape& shape);

/// Dense N-dimensional array of doubles stored in C order (last mode
/// varies fastest). Matrices are order-2 tensors, vectors order-1.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor identity(std::size_t n);
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

    const Shape& shape() const { return shape_; }
    std::size_t order() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    const double& operator[](std::size_t flat) const { return data_[flat]; }

    /// 0-based multi-index access.
    double& at(std::span<const std::size_t> index);
    double at(std::span<const std::size_t> index) const;
    double& at(std::initializer_list<std::size_t> index) {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }
    double at(std::initializer_list<std::size_t> index) const {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }

    std::size_t offset(std::span<const std::size_t> index) const;

    /// Same data, new shape with the same element count.
    Tensor reshaped(Shape shape) const;

    bool operator==(const Tensor& other) const = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Mode-n unfolding X_[n]. Rows index mode n; the column of element
/// (d_1..d_N) is sum_{k!=n} d_k * prod_{m>k, m!=n} D_m, i.e. the remaining
/// modes in increasing order with the last varying fastest.
struct UnfoldedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t mode = 0;  // 1-based
    Shape sourceShape;
    std::vector<double> data;  // row-major

    Tensor asMatrix() const;
};

UnfoldedMatrix unfold(const Tensor& x, std::size_t mode);
Tensor fold(const UnfoldedMatrix& m);

/// Counts scalar multiply-accumulates actually executed by the products below.
struct MacCounter {
    std::uint64_t count = 0;
};

Tensor matmul(const Tensor& a, const Tensor& b, MacCounter* macs = nullptr);
Tensor transpose(const Tensor& m);

/// x ×_mode m, with m of shape (R, D_mode): fold(m · X_[mode]).
Tensor modeProduct(const Tensor& x, const Tensor& m, std::size_t mode,
                   MacCounter* macs = nullptr);

Tensor kronecker(const Tensor& a, const Tensor& b);

/// One projection factor per mode; an empty optional skips the mode
/// (identity, never stored).
class FactorSet {
public:
    FactorSet() = default;
    FactorSet(Shape inputShape, std::vector<std::optional<Tensor>> factors);

    const Shape& inputShape() const { return inputShape_; }
    Shape outputShape() const;
    std::size_t order() const { return inputShape_.size(); }

    bool skipped(std::size_t mode) const { return !factors_.at(mode - 1).has_value(); }
    const Tensor& factor(std::size_t mode) const;
    Tensor& factor(std::size_t mode);

    /// Factor of the mode, or the identity when skipped.
    Tensor factorOrIdentity(std::size_t mode) const;

    std::size_t parameterCount() const;

private:
    Shape inputShape_;
    std::vector<std::optional<Tensor>> factors_;
};

/// Tucker contraction x ×_1 V(1) ... ×_N V(N), skipping identity modes.
/// Products are applied in ascending mode order unless an order (a
/// permutation of 1..N) is given.
Tensor multiModeProduct(const Tensor& x, const FactorSet& factors, MacCounter* macs = nullptr);
Tensor multiModeProduct(const Tensor& x, const FactorSet& factors,
                        std::span<const std::size_t> order, MacCounter* macs = nullptr);

// Elementwise helpers used across modules.
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);
double dot(const Tensor& a, const Tensor& b);
double maxAbsDiff(const Tensor& a, const Tensor& b);
double maxAbs(const Tensor& a);

}  // namespace tcl
