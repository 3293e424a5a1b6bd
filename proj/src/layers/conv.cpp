#include "tcl/layers/conv.hpp"

#include <cmath>

#include "tcl/error.hpp"

namespace tcl {

std::size_t convOutputSize(std::size_t input, std::size_t kernel, ConvGeometry geometry) {
    if (geometry.stride == 0) throw ShapeError("conv stride must be positive");
    const std::size_t padded = input + 2 * geometry.padding;
    if (kernel == 0 || kernel > padded) {
        throw ShapeError("conv kernel " + std::to_string(kernel) + " does not fit padded input " +
                         std::to_string(padded));
    }
    if ((padded - kernel) % geometry.stride != 0) {
        throw ShapeError("conv stride " + std::to_string(geometry.stride) + " does not tile padded input " +
                         std::to_string(padded) + " with kernel " + std::to_string(kernel));
    }
    return (padded - kernel) / geometry.stride + 1;
}

namespace {

struct ConvDims {
    std::size_t n, ci, h, w, co, k, oh, ow;
};

ConvDims convDims(const Tensor& x, const Tensor& kernel, const Tensor& bias, ConvGeometry g) {
    if (x.order() != 4 || kernel.order() != 4 || kernel.dim(2) != kernel.dim(3) || kernel.dim(1) != x.dim(1) ||
        bias.order() != 1 || bias.dim(0) != kernel.dim(0)) {
        throw ShapeError("conv: input " + shapeToString(x.shape()) + ", kernel " + shapeToString(kernel.shape()) +
                         ", bias " + shapeToString(bias.shape()));
    }
    const std::size_t k = kernel.dim(2);
    return {x.dim(0), x.dim(1), x.dim(2), x.dim(3), kernel.dim(0), k,
            convOutputSize(x.dim(2), k, g), convOutputSize(x.dim(3), k, g)};
}

}  // namespace

Tensor conv2dForward(const Tensor& x, const Tensor& kernel, const Tensor& bias, ConvGeometry g) {
    const ConvDims d = convDims(x, kernel, bias, g);
    Tensor y({d.n, d.co, d.oh, d.ow});
    const long pad = static_cast<long>(g.padding);
    for (std::size_t n = 0; n < d.n; ++n)
        for (std::size_t co = 0; co < d.co; ++co) {
            double* out = &y[((n * d.co + co) * d.oh) * d.ow];
            for (std::size_t i = 0; i < d.oh * d.ow; ++i) out[i] = bias[co];
            for (std::size_t ci = 0; ci < d.ci; ++ci) {
                const double* in = &x[(n * d.ci + ci) * d.h * d.w];
                const double* ker = &kernel[(co * d.ci + ci) * d.k * d.k];
                for (std::size_t oh = 0; oh < d.oh; ++oh)
                    for (std::size_t ow = 0; ow < d.ow; ++ow) {
                        double acc = 0.0;
                        for (std::size_t kh = 0; kh < d.k; ++kh) {
                            const long ih = static_cast<long>(oh * g.stride + kh) - pad;
                            if (ih < 0 || ih >= static_cast<long>(d.h)) continue;
                            for (std::size_t kw = 0; kw < d.k; ++kw) {
                                const long iw = static_cast<long>(ow * g.stride + kw) - pad;
                                if (iw < 0 || iw >= static_cast<long>(d.w)) continue;
                                acc += ker[kh * d.k + kw] * in[ih * d.w + iw];
                            }
                        }
                        out[oh * d.ow + ow] += acc;
                    }
            }
        }
    return y;
}

LayerGrad conv2dBackward(const Tensor& x, const Tensor& kernel, const Tensor& bias, ConvGeometry g,
                         const Tensor& upstream) {
    const ConvDims d = convDims(x, kernel, bias, g);
    if (upstream.shape() != Shape{d.n, d.co, d.oh, d.ow}) throw ShapeError("conv: upstream shape mismatch");
    Tensor dx(x.shape()), dk(kernel.shape()), db(bias.shape());
    const long pad = static_cast<long>(g.padding);
    for (std::size_t n = 0; n < d.n; ++n)
        for (std::size_t co = 0; co < d.co; ++co) {
            const double* up = &upstream[((n * d.co + co) * d.oh) * d.ow];
            for (std::size_t i = 0; i < d.oh * d.ow; ++i) db[co] += up[i];
            for (std::size_t ci = 0; ci < d.ci; ++ci) {
                const double* in = &x[(n * d.ci + ci) * d.h * d.w];
                double* din = &dx[(n * d.ci + ci) * d.h * d.w];
                const double* ker = &kernel[(co * d.ci + ci) * d.k * d.k];
                double* dker = &dk[(co * d.ci + ci) * d.k * d.k];
                for (std::size_t oh = 0; oh < d.oh; ++oh)
                    for (std::size_t ow = 0; ow < d.ow; ++ow) {
                        const double u = up[oh * d.ow + ow];
                        for (std::size_t kh = 0; kh < d.k; ++kh) {
                            const long ih = static_cast<long>(oh * g.stride + kh) - pad;
                            if (ih < 0 || ih >= static_cast<long>(d.h)) continue;
                            for (std::size_t kw = 0; kw < d.k; ++kw) {
                                const long iw = static_cast<long>(ow * g.stride + kw) - pad;
                                if (iw < 0 || iw >= static_cast<long>(d.w)) continue;
                                dker[kh * d.k + kw] += u * in[ih * d.w + iw];
                                din[ih * d.w + iw] += u * ker[kh * d.k + kw];
                            }
                        }
                    }
            }
        }
    return {std::move(dx), {std::move(dk), std::move(db)}};
}

Conv2d::Conv2d(std::size_t inChannels, std::size_t outChannels, std::size_t kernel, ConvGeometry geometry, Rng& rng)
    : geometry_(geometry),
      kernel_{"kernel",
              gaussianTensor({outChannels, inChannels, kernel, kernel},
                             std::sqrt(2.0 / static_cast<double>(inChannels * kernel * kernel)), rng),
              Tensor({outChannels, inChannels, kernel, kernel})},
      bias_{"bias", Tensor({outChannels}), Tensor({outChannels})} {}

Tensor Conv2d::forward(const Tensor& x, Phase) {
    cachedInput_ = x;
    return conv2dForward(x, kernel_.value, bias_.value, geometry_);
}

Tensor Conv2d::backward(const Tensor& upstream) {
    LayerGrad g = conv2dBackward(cachedInput_, kernel_.value, bias_.value, geometry_, upstream);
    kernel_.grad = std::move(g.paramGrads[0]);
    bias_.grad = std::move(g.paramGrads[1]);
    return std::move(g.inputGrad);
}

namespace {

void checkPool(const Tensor& x, std::size_t window) {
    if (x.order() != 4) throw ShapeError("max pool expects NCHW input, got " + shapeToString(x.shape()));
    if (window == 0 || x.dim(2) % window != 0 || x.dim(3) % window != 0) {
        throw ShapeError("max pool window " + std::to_string(window) + " does not tile " +
                         std::to_string(x.dim(2)) + "x" + std::to_string(x.dim(3)));
    }
}

// Flat input offset of the maximum of each output window.
std::vector<std::size_t> poolArgmax(const Tensor& x, std::size_t w) {
    const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t oh = h / w, ow = wd / w;
    std::vector<std::size_t> arg(planes * oh * ow);
    for (std::size_t p = 0; p < planes; ++p)
        for (std::size_t i = 0; i < oh; ++i)
            for (std::size_t j = 0; j < ow; ++j) {
                std::size_t best = p * h * wd + (i * w) * wd + j * w;
                for (std::size_t a = 0; a < w; ++a)
                    for (std::size_t b = 0; b < w; ++b) {
                        const std::size_t idx = p * h * wd + (i * w + a) * wd + (j * w + b);
                        if (x[idx] > x[best]) best = idx;
                    }
                arg[(p * oh + i) * ow + j] = best;
            }
    return arg;
}

}  // namespace

Tensor maxPool2dForward(const Tensor& x, std::size_t window) {
    checkPool(x, window);
    Tensor y({x.dim(0), x.dim(1), x.dim(2) / window, x.dim(3) / window});
    const auto arg = poolArgmax(x, window);
    for (std::size_t i = 0; i < arg.size(); ++i) y[i] = x[arg[i]];
    return y;
}

Tensor maxPool2dBackward(const Tensor& x, std::size_t window, const Tensor& upstream) {
    checkPool(x, window);
    if (upstream.shape() != Shape{x.dim(0), x.dim(1), x.dim(2) / window, x.dim(3) / window})
        throw ShapeError("max pool: upstream shape mismatch");
    Tensor dx(x.shape());
    const auto arg = poolArgmax(x, window);
    for (std::size_t i = 0; i < arg.size(); ++i) dx[arg[i]] += upstream[i];
    return dx;
}

Tensor MaxPool2d::forward(const Tensor& x, Phase) {
    cachedInput_ = x;
    return maxPool2dForward(x, window_);
}

Tensor MaxPool2d::backward(const Tensor& upstream) { return maxPool2dBackward(cachedInput_, window_, upstream); }

}  // namespace tcl
