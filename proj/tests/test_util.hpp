#pragma once

#include <functional>
#include <random>
#include <vector>

#include "tcl/tensor.hpp"

namespace tcl::testing {

inline Tensor randomTensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor t(shape);
    for (auto& v : t.data()) v = dist(rng);
    return t;
}

inline Shape randomShape(std::mt19937_64& rng, std::size_t minOrder, std::size_t maxOrder, std::size_t maxDim) {
    std::uniform_int_distribution<std::size_t> order(minOrder, maxOrder);
    std::uniform_int_distribution<std::size_t> dim(1, maxDim);
    Shape s(order(rng));
    for (auto& d : s) d = dim(rng);
    return s;
}

inline Tensor iota(const Shape& shape) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    return t;
}

/// Calls f for every multi-index of `shape` in C order.
inline void forEachIndex(const Shape& shape, const std::function<void(const std::vector<std::size_t>&)>& f) {
    std::vector<std::size_t> idx(shape.size(), 0);
    const std::size_t total = shapeSize(shape);
    for (std::size_t n = 0; n < total; ++n) {
        f(idx);
        for (std::size_t k = shape.size(); k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
}

/// Elementwise x ×_mode m: out[.., r, ..] = sum_d m[r, d] x[.., d, ..].
inline Tensor modeProductOracle(const Tensor& x, const Tensor& m, std::size_t mode) {
    Shape out = x.shape();
    out[mode - 1] = m.dim(0);
    Tensor y(out);
    forEachIndex(out, [&](const std::vector<std::size_t>& idx) {
        std::vector<std::size_t> src = idx;
        double s = 0.0;
        for (std::size_t d = 0; d < x.dim(mode - 1); ++d) {
            src[mode - 1] = d;
            s += m.at({idx[mode - 1], d}) * x.at(src);
        }
        y.at(idx) = s;
    });
    return y;
}

inline double relErr(const Tensor& a, const Tensor& b) {
    return maxAbsDiff(a, b) / std::max(1.0, maxAbs(b));
}

}  // namespace tcl::testing
