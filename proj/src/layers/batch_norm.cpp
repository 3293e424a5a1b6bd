#include "tcl/layers/batch_norm.hpp"

#include <cmath>

#include "tcl/error.hpp"

namespace tcl {

namespace {

// Flat offset of (n, c, s) is (n * channels + c) * spatial + s.
struct BnLayout {
    std::size_t batch;
    std::size_t channels;
    std::size_t spatial;
};

BnLayout layoutOf(const Shape& shape, BnGranularity granularity) {
    if (shape.size() < 2) throw ShapeError("batch norm needs a batch mode and at least one feature mode");
    const std::size_t batch = shape[0];
    const std::size_t rest = shapeSize(shape) / batch;
    if (granularity == BnGranularity::PerFeature || shape.size() == 2) return {batch, rest, 1};
    return {batch, shape[1], rest / shape[1]};
}

void checkParams(const BnLayout& l, const Tensor& gamma, const Tensor& beta) {
    if (gamma.size() != l.channels || beta.size() != l.channels) {
        throw ShapeError("batch norm has " + std::to_string(gamma.size()) + " features, input has " +
                         std::to_string(l.channels));
    }
}

struct Moments {
    std::vector<double> mean;
    std::vector<double> var;
};

Moments batchMoments(const Tensor& x, const BnLayout& l) {
    Moments m{std::vector<double>(l.channels, 0.0), std::vector<double>(l.channels, 0.0)};
    const double count = static_cast<double>(l.batch * l.spatial);
    for (std::size_t n = 0; n < l.batch; ++n)
        for (std::size_t c = 0; c < l.channels; ++c)
            for (std::size_t s = 0; s < l.spatial; ++s) m.mean[c] += x[(n * l.channels + c) * l.spatial + s];
    for (auto& v : m.mean) v /= count;
    for (std::size_t n = 0; n < l.batch; ++n)
        for (std::size_t c = 0; c < l.channels; ++c)
            for (std::size_t s = 0; s < l.spatial; ++s) {
                const double d = x[(n * l.channels + c) * l.spatial + s] - m.mean[c];
                m.var[c] += d * d;
            }
    for (auto& v : m.var) v /= count;
    return m;
}

}  // namespace

std::size_t batchNormFeatures(const Shape& shape, BnGranularity granularity) {
    Shape withBatch{1};
    withBatch.insert(withBatch.end(), shape.begin(), shape.end());
    return layoutOf(withBatch, granularity).channels;
}

Tensor batchNormForward(const Tensor& x, const Tensor& gamma, const Tensor& beta, RunningStats& stats, Phase phase,
                        const BatchNormOptions& options) {
    const BnLayout l = layoutOf(x.shape(), options.granularity);
    checkParams(l, gamma, beta);
    if (stats.mean.size() != l.channels || stats.var.size() != l.channels)
        throw ShapeError("batch norm running statistics have the wrong size");

    std::vector<double> mean(l.channels), var(l.channels);
    if (phase == Phase::Train) {
        if (l.batch < 2) throw DegenerateBatchError("batch norm in train mode needs a batch of at least 2");
        Moments m = batchMoments(x, l);
        for (std::size_t c = 0; c < l.channels; ++c) {
            stats.mean[c] = options.momentum * stats.mean[c] + (1.0 - options.momentum) * m.mean[c];
            stats.var[c] = options.momentum * stats.var[c] + (1.0 - options.momentum) * m.var[c];
        }
        mean = std::move(m.mean);
        var = std::move(m.var);
    } else {
        mean = stats.mean.values();
        var = stats.var.values();
    }

    Tensor y(x.shape());
    for (std::size_t c = 0; c < l.channels; ++c) {
        const double inv = 1.0 / std::sqrt(var[c] + options.eps);
        for (std::size_t n = 0; n < l.batch; ++n)
            for (std::size_t s = 0; s < l.spatial; ++s) {
                const std::size_t i = (n * l.channels + c) * l.spatial + s;
                y[i] = gamma[c] * ((x[i] - mean[c]) * inv) + beta[c];
            }
    }
    return y;
}

LayerGrad batchNormBackward(const Tensor& x, const Tensor& gamma, const Tensor& beta, const RunningStats& stats,
                            const Tensor& upstream, Phase phase, const BatchNormOptions& options) {
    const BnLayout l = layoutOf(x.shape(), options.granularity);
    checkParams(l, gamma, beta);
    if (upstream.shape() != x.shape()) throw ShapeError("batch norm upstream shape mismatch");

    Moments m;
    if (phase == Phase::Train) {
        if (l.batch < 2) throw DegenerateBatchError("batch norm in train mode needs a batch of at least 2");
        m = batchMoments(x, l);
    } else {
        m = {stats.mean.values(), stats.var.values()};
    }

    LayerGrad g;
    g.inputGrad = Tensor(x.shape());
    Tensor dgamma({l.channels}), dbeta({l.channels});
    const double count = static_cast<double>(l.batch * l.spatial);
    for (std::size_t c = 0; c < l.channels; ++c) {
        const double inv = 1.0 / std::sqrt(m.var[c] + options.eps);
        double sumDy = 0.0, sumDyXhat = 0.0;
        for (std::size_t n = 0; n < l.batch; ++n)
            for (std::size_t s = 0; s < l.spatial; ++s) {
                const std::size_t i = (n * l.channels + c) * l.spatial + s;
                const double xhat = (x[i] - m.mean[c]) * inv;
                sumDy += upstream[i];
                sumDyXhat += upstream[i] * xhat;
            }
        dgamma[c] = sumDyXhat;
        dbeta[c] = sumDy;
        for (std::size_t n = 0; n < l.batch; ++n)
            for (std::size_t s = 0; s < l.spatial; ++s) {
                const std::size_t i = (n * l.channels + c) * l.spatial + s;
                if (phase == Phase::Train) {
                    const double xhat = (x[i] - m.mean[c]) * inv;
                    g.inputGrad[i] = gamma[c] * inv * (upstream[i] - sumDy / count - xhat * sumDyXhat / count);
                } else {
                    g.inputGrad[i] = gamma[c] * inv * upstream[i];
                }
            }
    }
    g.paramGrads.push_back(std::move(dgamma));
    g.paramGrads.push_back(std::move(dbeta));
    return g;
}

BatchNorm::BatchNorm(std::size_t features, BatchNormOptions options)
    : options_(options),
      gamma_{"gamma", Tensor({features}, 1.0), Tensor({features})},
      beta_{"beta", Tensor({features}), Tensor({features})},
      stats_{Tensor({features}), Tensor({features}, 1.0)} {}

void BatchNorm::setPassthrough() {
    const std::size_t f = gamma_.value.size();
    gamma_.value = Tensor({f}, 1.0);
    beta_.value = Tensor({f});
    stats_.mean = Tensor({f});
    stats_.var = Tensor({f}, 1.0 - options_.eps);
}

Tensor BatchNorm::forward(const Tensor& x, Phase phase) {
    cachedInput_ = x;
    cachedPhase_ = phase;
    return batchNormForward(x, gamma_.value, beta_.value, stats_, phase, options_);
}

Tensor BatchNorm::backward(const Tensor& upstream) {
    LayerGrad g = batchNormBackward(cachedInput_, gamma_.value, beta_.value, stats_, upstream, cachedPhase_, options_);
    gamma_.grad = std::move(g.paramGrads[0]);
    beta_.grad = std::move(g.paramGrads[1]);
    return std::move(g.inputGrad);
}

}  // namespace tcl
