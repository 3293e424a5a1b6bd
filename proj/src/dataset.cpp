#include "tcl/dataset.hpp"

#include <cmath>

#include "tcl/error.hpp"

namespace tcl {

ChannelStats computeChannelStats(const Tensor& images) {
    if (images.order() < 2) throw ShapeError("images need a batch and a channel mode");
    const std::size_t n = images.dim(0), c = images.dim(1);
    const std::size_t spatial = images.size() / (n * c);
    ChannelStats s{std::vector<double>(c, 0.0), std::vector<double>(c, 0.0)};
    const double count = static_cast<double>(n * spatial);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t p = 0; p < spatial; ++p) s.mean[ch] += images[(i * c + ch) * spatial + p];
    for (auto& m : s.mean) m /= count;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t p = 0; p < spatial; ++p) {
                const double d = images[(i * c + ch) * spatial + p] - s.mean[ch];
                s.stddev[ch] += d * d;
            }
    for (auto& v : s.stddev) v = std::sqrt(v / count);
    return s;
}

void validateDataset(const Dataset& d) {
    if (d.labels.empty()) throw ConsistencyError("dataset is empty");
    if (d.images.order() < 2 || d.images.dim(0) != d.labels.size())
        throw ConsistencyError("dataset has " + std::to_string(d.labels.size()) + " labels for images " +
                               shapeToString(d.images.shape()));
    for (int l : d.labels)
        if (l < 0 || static_cast<std::size_t>(l) >= d.numClasses)
            throw ConsistencyError("label " + std::to_string(l) + " outside [0, " + std::to_string(d.numClasses) + ")");
}

Dataset normalized(const Dataset& d, const ChannelStats& stats) {
    Dataset out = d;
    const std::size_t n = d.images.dim(0), c = d.images.dim(1);
    if (stats.mean.size() != c || stats.stddev.size() != c) throw ShapeError("normalization stats do not match channels");
    const std::size_t spatial = d.images.size() / (n * c);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double sd = stats.stddev[ch] > 0.0 ? stats.stddev[ch] : 1.0;
            for (std::size_t p = 0; p < spatial; ++p) {
                double& v = out.images[(i * c + ch) * spatial + p];
                v = (v - stats.mean[ch]) / sd;
            }
        }
    return out;
}

Tensor gatherImages(const Dataset& d, std::span<const std::size_t> indices) {
    Shape shape = d.images.shape();
    const std::size_t stride = d.images.size() / shape[0];
    shape[0] = indices.size();
    Tensor out(shape);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const double* from = &d.images[indices[i] * stride];
        std::copy(from, from + stride, out.data().begin() + static_cast<std::ptrdiff_t>(i * stride));
    }
    return out;
}

std::vector<int> gatherLabels(const Dataset& d, std::span<const std::size_t> indices) {
    std::vector<int> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(d.labels.at(i));
    return out;
}

}  // namespace tcl
