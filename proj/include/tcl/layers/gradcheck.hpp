#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcl/layers/layer.hpp"

namespace tcl {

struct GradCheckOptions {
    double step = 1e-5;
    /// Denominator floor of the relative error |a-n| / max(|a|, |n|, floor).
    double floor = 1e-3;
    Phase phase = Phase::Train;
};

/// Compares analytic gradients against central differences of the
/// projection loss <P, layer(x)> with P drawn from `seed`. Returns the
/// worst relative error over every parameter entry and every input entry.
double gradCheck(Layer& layer, const Tensor& x, std::uint64_t seed, const GradCheckOptions& options = {});

double relativeError(double analytic, double numeric, double floor);

struct GradSuiteEntry {
    std::string layer;
    double worst = 0.0;
    double tolerance = 0.0;
    bool passed() const { return worst < tolerance; }
};

/// Finite-difference checks of every layer type (TCL, FC, batch norm,
/// conv, max pool, relu, softmax cross-entropy) over `repeats` seeds
/// derived from `seed`. Max pool and relu inputs are kept away from ties
/// and kinks.
std::vector<GradSuiteEntry> gradientSuite(std::uint64_t seed, std::size_t repeats = 20);

}  // namespace tcl
