#pragma once

#include <span>
#include <string>
#include <vector>

#include "tcl/tensor.hpp"

namespace tcl {

struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Images (N, C, H, W) with values in [0, 1] and integer labels.
struct Dataset {
    Tensor images;
    std::vector<int> labels;
    std::size_t numClasses = 0;
    std::string split = "train";
    ChannelStats stats;

    std::size_t size() const { return labels.size(); }
    Shape sampleShape() const { return Shape(images.shape().begin() + 1, images.shape().end()); }
};

ChannelStats computeChannelStats(const Tensor& images);

/// Checks the dataset invariants; throws ConsistencyError.
void validateDataset(const Dataset& d);

/// Per-channel standardization with the given statistics.
Dataset normalized(const Dataset& d, const ChannelStats& stats);

/// Rows `indices` of the dataset, in order.
Tensor gatherImages(const Dataset& d, std::span<const std::size_t> indices);
std::vector<int> gatherLabels(const Dataset& d, std::span<const std::size_t> indices);

}  // namespace tcl
