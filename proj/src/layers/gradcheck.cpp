#include "tcl/layers/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "tcl/error.hpp"
#include "tcl/layers/batch_norm.hpp"
#include "tcl/layers/conv.hpp"
#include "tcl/layers/dense.hpp"
#include "tcl/layers/loss.hpp"
#include "tcl/layers/tcl_layer.hpp"

namespace tcl {

double relativeError(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

namespace {

void requireFinite(const Tensor& t, const char* what) {
    for (double v : t.data())
        if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
}

}  // namespace

double gradCheck(Layer& layer, const Tensor& x, std::uint64_t seed, const GradCheckOptions& options) {
    Rng rng(seed);
    Tensor y = layer.forward(x, options.phase);
    requireFinite(y, "layer output");
    const Tensor projection = gaussianTensor(y.shape(), 1.0, rng);

    const Tensor inputGrad = layer.backward(projection);
    requireFinite(inputGrad, "input gradient");
    std::vector<Tensor> paramGrads;
    for (Parameter* p : layer.parameters()) {
        requireFinite(p->grad, "parameter gradient");
        paramGrads.push_back(p->grad);
    }

    auto loss = [&](const Tensor& input) {
        const double l = dot(projection, layer.forward(input, options.phase));
        if (!std::isfinite(l)) throw NumericError("non-finite loss during finite differences");
        return l;
    };

    double worst = 0.0;
    const double h = options.step;
    auto params = layer.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& value = params[p]->value;
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double saved = value[i];
            value[i] = saved + h;
            const double up = loss(x);
            value[i] = saved - h;
            const double down = loss(x);
            value[i] = saved;
            worst = std::max(worst, relativeError(paramGrads[p][i], (up - down) / (2.0 * h), options.floor));
        }
    }
    Tensor probe = x;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + h;
        const double up = loss(probe);
        probe[i] = saved - h;
        const double down = loss(probe);
        probe[i] = saved;
        worst = std::max(worst, relativeError(inputGrad[i], (up - down) / (2.0 * h), options.floor));
    }
    return worst;
}

}  // namespace tcl

namespace tcl {

namespace {

Tensor uniformTensor(const Shape& shape, Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor t(shape);
    for (auto& v : t.data()) v = u(rng);
    return t;
}

// Distinct values 0.05 apart in random positions.
Tensor spacedTensor(const Shape& shape, Rng& rng) {
    Tensor t(shape);
    std::vector<double> vals(t.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = -1.0 + 0.05 * static_cast<double>(i) + 0.0125;
    std::shuffle(vals.begin(), vals.end(), rng);
    std::copy(vals.begin(), vals.end(), t.data().begin());
    return t;
}

double softmaxCheck(Rng& rng, double step, double floor) {
    const Tensor logits = uniformTensor({4, 5}, rng, -3.0, 3.0);
    std::vector<int> labels(4);
    std::uniform_int_distribution<int> pick(0, 4);
    for (auto& l : labels) l = pick(rng);
    const LossResult base = softmaxCrossEntropy(logits, labels);
    Tensor probe = logits;
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + step;
        const double up = softmaxCrossEntropy(probe, labels).loss;
        probe[i] = saved - step;
        const double down = softmaxCrossEntropy(probe, labels).loss;
        probe[i] = saved;
        worst = std::max(worst, relativeError(base.inputGrad[i], (up - down) / (2.0 * step), floor));
    }
    return worst;
}

}  // namespace

std::vector<GradSuiteEntry> gradientSuite(std::uint64_t seed, std::size_t repeats) {
    std::vector<GradSuiteEntry> out{{"tcl", 0.0, 1e-6},     {"fc", 0.0, 1e-6},   {"batchnorm", 0.0, 1e-5},
                                    {"conv", 0.0, 1e-5},    {"maxpool", 0.0, 1e-5}, {"relu", 0.0, 1e-5},
                                    {"softmax", 0.0, 1e-6}};
    const GradCheckOptions opts;
    for (std::size_t r = 0; r < repeats; ++r) {
        const std::uint64_t s = seed * 1000 + r;
        Rng rng(s);
        auto record = [&](std::size_t i, double v) { out[i].worst = std::max(out[i].worst, v); };

        TclLayer tcl({3, 4, 4}, {2, 2, 2}, FactorInit::Gaussian, rng);
        record(0, gradCheck(tcl, uniformTensor({2, 3, 4, 4}, rng, -1, 1), s, opts));

        Linear fc(5, 3, rng);
        fc.bias() = uniformTensor({3}, rng, -1, 1);
        record(1, gradCheck(fc, uniformTensor({4, 5}, rng, -1, 1), s, opts));

        BatchNorm bn(3, {BnGranularity::PerChannel});
        bn.parameters()[0]->value = uniformTensor({3}, rng, 0.5, 1.5);
        bn.parameters()[1]->value = uniformTensor({3}, rng, -1, 1);
        record(2, gradCheck(bn, uniformTensor({4, 3, 2, 2}, rng, -1, 1), s, opts));
        BatchNorm bnFeature(6, {BnGranularity::PerFeature});
        record(2, gradCheck(bnFeature, uniformTensor({5, 6}, rng, -1, 1), s, opts));

        Conv2d conv(2, 3, 3, {1, 1}, rng);
        conv.bias() = uniformTensor({3}, rng, -1, 1);
        record(3, gradCheck(conv, uniformTensor({2, 2, 5, 5}, rng, -1, 1), s, opts));

        MaxPool2d pool(2);
        record(4, gradCheck(pool, spacedTensor({2, 2, 4, 4}, rng), s, opts));

        Relu relu;
        record(5, gradCheck(relu, spacedTensor({3, 8}, rng), s, opts));

        record(6, softmaxCheck(rng, opts.step, opts.floor));
    }
    return out;
}

}  // namespace tcl
