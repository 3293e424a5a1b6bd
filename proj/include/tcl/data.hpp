#pragma once

#include <cstdint>
#include <string>

#include "tcl/dataset.hpp"

namespace tcl {

/// Reads an IDX image file (unsigned-byte, 3 dims (N,H,W) or 4 dims
/// (N,C,H,W)) and an IDX label file (1 dim). Pixels are scaled by 1/255.
/// Throws IoError for unreadable, empty or truncated files, FormatError
/// for bad headers and ConsistencyError when the counts disagree.
Dataset loadIdx(const std::string& imagesPath, const std::string& labelsPath, const std::string& split = "train");

/// Parses IDX bytes already in memory; `what` names the source in errors.
struct IdxArray {
    std::vector<std::size_t> dims;
    std::vector<std::uint8_t> values;
};
IdxArray parseIdx(const std::vector<std::uint8_t>& bytes, const std::string& what);

/// Writes images quantized to bytes (round(v * 255)); grayscale images
/// are written with 3 dims, others with 4.
void writeIdxImages(const std::string& path, const Tensor& images);
void writeIdxLabels(const std::string& path, const std::vector<int>& labels);

struct SynthSpec {
    std::size_t numClasses = 3;
    std::size_t numSamples = 200;  // labels assigned round-robin over classes
    Shape shape{3, 8, 8};
    std::uint64_t seed = 0;
    double noise = 0.1;
};

/// Class templates are uniform in [0,1] and depend only on the seed; each
/// sample is its template plus Gaussian noise, clipped to [0,1]. Train and
/// test splits draw noise from different streams.
Dataset synthDataset(const SynthSpec& spec, const std::string& split = "train");

/// Class templates used by synthDataset.
std::vector<Tensor> synthTemplates(const SynthSpec& spec);

}  // namespace tcl
