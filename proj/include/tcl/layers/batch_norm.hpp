#pragma once

#include "tcl/layers/layer.hpp"

namespace tcl {

/// PerChannel: statistics over the batch and every mode after the
/// channel mode (mode 2). PerFeature: every non-batch coordinate is its
/// own feature.
enum class BnGranularity { PerChannel, PerFeature };

struct RunningStats {
    Tensor mean;
    Tensor var;
};

struct BatchNormOptions {
    BnGranularity granularity = BnGranularity::PerChannel;
    double eps = 1e-5;
    double momentum = 0.9;  // running = momentum * running + (1 - momentum) * batch
};

/// Number of normalized features for an input of this shape.
std::size_t batchNormFeatures(const Shape& shape, BnGranularity granularity);

/// Train mode normalizes with batch statistics and updates `stats`;
/// eval mode normalizes with `stats`.
Tensor batchNormForward(const Tensor& x, const Tensor& gamma, const Tensor& beta, RunningStats& stats,
                        Phase phase, const BatchNormOptions& options = {});
/// paramGrads = {dgamma, dbeta}.
LayerGrad batchNormBackward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                            const RunningStats& stats, const Tensor& upstream, Phase phase,
                            const BatchNormOptions& options = {});

class BatchNorm : public Layer {
public:
    BatchNorm(std::size_t features, BatchNormOptions options);

    std::string kind() const override { return "batchnorm"; }
    Tensor forward(const Tensor& x, Phase phase) override;
    Tensor backward(const Tensor& upstream) override;
    std::vector<Parameter*> parameters() override { return {&gamma_, &beta_}; }

    RunningStats& stats() { return stats_; }
    const BatchNormOptions& options() const { return options_; }

    /// gamma 1, beta 0, running mean 0, running var 1 - eps: eval mode is
    /// then an exact identity.
    void setPassthrough();

private:
    BatchNormOptions options_;
    Parameter gamma_;
    Parameter beta_;
    RunningStats stats_;
    Tensor cachedInput_;
    Phase cachedPhase_ = Phase::Train;
};

}  // namespace tcl
