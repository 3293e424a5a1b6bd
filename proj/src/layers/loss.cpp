#include "tcl/layers/loss.hpp"

#include <algorithm>
#include <cmath>

#include "tcl/error.hpp"

namespace tcl {

LossResult softmaxCrossEntropy(const Tensor& logits, std::span<const int> labels) {
    if (logits.order() != 2 || logits.dim(0) != labels.size() || labels.empty())
        throw ShapeError("softmax cross-entropy: logits " + shapeToString(logits.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
    const std::size_t batch = logits.dim(0), classes = logits.dim(1);
    LossResult r{0.0, Tensor(logits.shape())};
    for (std::size_t i = 0; i < batch; ++i) {
        const int label = labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= classes)
            throw LabelError("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
        const double* row = &logits[i * classes];
        const double peak = *std::max_element(row, row + classes);
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) sum += std::exp(row[c] - peak);
        const double logSum = peak + std::log(sum);
        r.loss += logSum - row[label];
        for (std::size_t c = 0; c < classes; ++c) {
            const double p = std::exp(row[c] - logSum);
            r.inputGrad[i * classes + c] = (p - (static_cast<std::size_t>(label) == c ? 1.0 : 0.0)) / batch;
        }
    }
    r.loss /= static_cast<double>(batch);
    if (!std::isfinite(r.loss)) throw NumericError("softmax cross-entropy produced a non-finite loss");
    return r;
}

}  // namespace tcl
