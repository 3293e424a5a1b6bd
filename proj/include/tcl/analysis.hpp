#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcl/network.hpp"

namespace tcl {

using Count = std::uint64_t;

/// sum_k D_k * R_k.
Count tclParamCount(std::span<const std::size_t> dims, std::span<const std::size_t> ranks);
/// H * prod D_k, plus H with bias.
Count fcParamCount(std::span<const std::size_t> dims, std::size_t hidden, bool withBias);

/// Multiply-accumulates of a TCL applied mode by mode in `order` (1-based
/// permutation): each product costs R_k times the current tensor size,
/// with contracted modes at rank and pending modes at input size.
Count tclFlops(std::span<const std::size_t> dims, std::span<const std::size_t> ranks,
               std::span<const std::size_t> order);
/// Ascending order, written as sum_k prod_{i<=k} R_i prod_{j>=k} D_j.
Count tclFlops(std::span<const std::size_t> dims, std::span<const std::size_t> ranks);
/// Cheapest application order over all permutations.
Count tclFlopsMin(std::span<const std::size_t> dims, std::span<const std::size_t> ranks);
/// H * prod D_i.
Count fcFlops(std::span<const std::size_t> dims, std::size_t hidden);

struct LayerCost {
    std::string name;
    std::string spec;
    Count params = 0;
    Count flops = 0;
    /// Parameters counted toward the fully-connected block: FC and
    /// classifier weights without biases, and TCL factors.
    Count fcBlockParams = 0;
};

struct CostReport {
    std::string network;
    std::vector<LayerCost> perLayer;
    Count totalParams = 0;
    Count totalFlops = 0;
    Count fcBlockParams = 0;
    std::string baseline;
    std::optional<double> spaceSavings;  // fraction, vs `baseline`
};

/// Closed-form costs of every resolved layer (per sample).
CostReport analyze(const NetworkConfig& config);

/// 1 - modified.fcBlockParams / baseline.fcBlockParams.
double spaceSavings(const CostReport& baseline, const CostReport& modified);

/// analyze() plus savings against the config's named baseline preset.
CostReport analyzeWithSavings(const NetworkConfig& config);

/// Line-delimited records: one `layer` line per layer, a `total` line and,
/// when known, a `savings` line.
std::string formatCostReport(const CostReport& report);

struct TableRow {
    std::string label;
    std::string preset;
    std::string shapeReading;  // activation shape the row was computed under
    double computed = 0.0;     // percent
    double published = 0.0;    // percent
    double delta = 0.0;        // computed - published, percentage points
};

struct TableReport {
    int id = 0;
    std::string title;
    std::vector<TableRow> rows;
    std::vector<std::string> notes;
};

/// Space-savings column of the AlexNet/CIFAR100 (1), VGG/CIFAR100 (2) and
/// AlexNet/ImageNet (3) experiments, recomputed from the presets. Table 3
/// rows appear once per activation-shape reading, (256,5,5) and (256,6,6).
TableReport reproduceTable(int id);
std::string formatTable(const TableReport& table);

}  // namespace tcl
