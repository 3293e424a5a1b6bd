#include "tcl/layers/tcl_layer.hpp"

#include <cmath>

#include "tcl/error.hpp"

namespace tcl {

TclLayer::TclLayer(Shape inputDims, Shape ranks, FactorInit init, Rng& rng) : inputDims_(std::move(inputDims)) {
    if (ranks.size() != inputDims_.size()) {
        throw ShapeError("TCL ranks " + shapeToString(ranks) + " do not match input " + shapeToString(inputDims_));
    }
    for (std::size_t k = 0; k < ranks.size(); ++k) {
        const std::size_t d = inputDims_[k], r = ranks[k];
        if (r == 0) throw ShapeError("TCL rank must be positive");
        Tensor v;
        if (init == FactorInit::Identity) {
            if (r != d) throw ShapeError("identity initialization needs a size-preserving TCL");
            v = Tensor::identity(d);
        } else {
            v = gaussianTensor({r, d}, std::sqrt(2.0 / static_cast<double>(d + r)), rng);
        }
        factors_.push_back({"V" + std::to_string(k + 1), v, Tensor(v.shape())});
    }
}

TclLayer::TclLayer(std::vector<Tensor> factors) {
    for (std::size_t k = 0; k < factors.size(); ++k) {
        if (factors[k].order() != 2) throw ShapeError("TCL factor must be a matrix");
        inputDims_.push_back(factors[k].dim(1));
        Tensor grad(factors[k].shape());
        factors_.push_back({"V" + std::to_string(k + 1), std::move(factors[k]), std::move(grad)});
    }
}

Shape TclLayer::ranks() const {
    Shape r;
    for (const auto& f : factors_) r.push_back(f.value.dim(0));
    return r;
}

FactorSet TclLayer::factorSet(std::size_t batch) const {
    Shape in{batch};
    in.insert(in.end(), inputDims_.begin(), inputDims_.end());
    std::vector<std::optional<Tensor>> fs{std::nullopt};
    for (const auto& f : factors_) fs.emplace_back(f.value);
    return FactorSet(std::move(in), std::move(fs));
}

std::vector<Parameter*> TclLayer::parameters() {
    std::vector<Parameter*> out;
    for (auto& f : factors_) out.push_back(&f);
    return out;
}

namespace {

void checkInput(const TclLayer& layer, const Tensor& x) {
    const Shape& dims = layer.inputDims();
    if (x.order() != dims.size() + 1 || !std::equal(dims.begin(), dims.end(), x.shape().begin() + 1)) {
        throw ShapeError("TCL expects (batch, " + shapeToString(dims) + ") input, got " +
                         shapeToString(x.shape()));
    }
}

}  // namespace

Tensor tclForward(const TclLayer& layer, const Tensor& x) {
    checkInput(layer, x);
    return multiModeProduct(x, layer.factorSet(x.dim(0)));
}

LayerGrad tclBackward(const TclLayer& layer, const Tensor& x, const Tensor& upstream) {
    checkInput(layer, x);
    const FactorSet fs = layer.factorSet(x.dim(0));
    if (upstream.shape() != fs.outputShape()) {
        throw ShapeError("TCL upstream shape " + shapeToString(upstream.shape()) + ", expected " +
                         shapeToString(fs.outputShape()));
    }
    const std::size_t n = layer.contractedModes();
    LayerGrad g;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t mode = k + 2;
        // x contracted on every mode except this one.
        Tensor partial = x;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != k) partial = modeProduct(partial, layer.factor(j), j + 2);
        }
        const Tensor u = unfold(upstream, mode).asMatrix();
        const Tensor p = unfold(partial, mode).asMatrix();
        g.paramGrads.push_back(matmul(u, transpose(p)));
    }
    Tensor dx = upstream;
    for (std::size_t k = 0; k < n; ++k) dx = modeProduct(dx, transpose(layer.factor(k)), k + 2);
    g.inputGrad = std::move(dx);
    return g;
}

LayerGrad tclBackwardMatricized(const TclLayer& layer, const Tensor& x, const Tensor& upstream) {
    checkInput(layer, x);
    const FactorSet fs = layer.factorSet(x.dim(0));
    if (upstream.shape() != fs.outputShape()) throw ShapeError("TCL upstream shape mismatch");
    const std::size_t order = fs.order();

    // Kronecker chain over every mode except `mode`, increasing order,
    // with the batch mode contributing an identity.
    auto chainWithout = [&](std::size_t mode) {
        Tensor chain;
        for (std::size_t m = 1; m <= order; ++m) {
            if (m == mode) continue;
            Tensor f = fs.factorOrIdentity(m);
            chain = chain.empty() ? std::move(f) : kronecker(chain, f);
        }
        return chain;
    };

    LayerGrad g;
    for (std::size_t k = 0; k < layer.contractedModes(); ++k) {
        const std::size_t mode = k + 2;
        const Tensor chain = chainWithout(mode);
        const Tensor u = unfold(upstream, mode).asMatrix();
        const Tensor xm = unfold(x, mode).asMatrix();
        // dL/dV = U_[k] · K · X_[k]ᵀ
        g.paramGrads.push_back(matmul(matmul(u, chain), transpose(xm)));
        if (k == 0) {
            // dL/dX_[k] = V(k)ᵀ · U_[k] · K
            const Tensor dxm = matmul(matmul(transpose(layer.factor(k)), u), chain);
            UnfoldedMatrix um;
            um.rows = dxm.dim(0);
            um.cols = dxm.dim(1);
            um.mode = mode;
            um.sourceShape = x.shape();
            um.data = dxm.values();
            g.inputGrad = fold(um);
        }
    }
    return g;
}

Tensor TclLayer::forward(const Tensor& x, Phase) {
    cachedInput_ = x;
    return tclForward(*this, x);
}

Tensor TclLayer::backward(const Tensor& upstream) {
    LayerGrad g = tclBackward(*this, cachedInput_, upstream);
    for (std::size_t k = 0; k < factors_.size(); ++k) factors_[k].grad = std::move(g.paramGrads[k]);
    return std::move(g.inputGrad);
}

}  // namespace tcl
