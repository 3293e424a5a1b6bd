#pragma once

#include "tcl/layers/layer.hpp"

namespace tcl {

enum class FactorInit { Gaussian, Identity };

/// Tensor contraction layer TCL-(R_1..R_N). Holds one factor V(k) of shape
/// (R_k, D_k) per non-batch mode; the batch mode is always skipped.
class TclLayer : public Layer {
public:
    /// Gaussian init uses stddev sqrt(2/(D_k+R_k)). Identity init requires
    /// R_k == D_k on every mode.
    TclLayer(Shape inputDims, Shape ranks, FactorInit init, Rng& rng);
    explicit TclLayer(std::vector<Tensor> factors);

    std::string kind() const override { return "tcl"; }
    Tensor forward(const Tensor& x, Phase phase) override;
    Tensor backward(const Tensor& upstream) override;
    std::vector<Parameter*> parameters() override;

    const Shape& inputDims() const { return inputDims_; }
    Shape ranks() const;
    std::size_t contractedModes() const { return factors_.size(); }
    const Tensor& factor(std::size_t k) const { return factors_.at(k).value; }  // 0-based non-batch mode
    Tensor& factor(std::size_t k) { return factors_.at(k).value; }

    /// Factor set over (batch, D_1..D_N) with the batch mode skipped.
    FactorSet factorSet(std::size_t batch) const;

private:
    Shape inputDims_;
    std::vector<Parameter> factors_;
    Tensor cachedInput_;
};

Tensor tclForward(const TclLayer& layer, const Tensor& x);

/// Factor gradients unfold(U, k)·unfold(x ×_{j≠k} V(j), k)ᵀ and input
/// gradient U ×_k V(k)ᵀ, summed over the batch.
LayerGrad tclBackward(const TclLayer& layer, const Tensor& x, const Tensor& upstream);

/// Same gradients through the matricized identity
/// G_[k] = V(k)·X_[k]·(⊗_{j≠k} V(j))ᵀ with explicit Kronecker chains.
/// Quadratic in memory; meant for verification at small sizes.
LayerGrad tclBackwardMatricized(const TclLayer& layer, const Tensor& x, const Tensor& upstream);

}  // namespace tcl
