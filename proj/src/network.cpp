#include "tcl/network.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>

#include "tcl/error.hpp"
#include "tcl/layers/batch_norm.hpp"
#include "tcl/layers/conv.hpp"
#include "tcl/layers/dense.hpp"
#include "tcl/layers/loss.hpp"

namespace tcl {

namespace {

const std::map<std::string, LayerKind, std::less<>> kKindNames{
    {"conv", LayerKind::Conv},     {"maxpool", LayerKind::MaxPool}, {"relu", LayerKind::Relu},
    {"batchnorm", LayerKind::BatchNorm}, {"flatten", LayerKind::Flatten}, {"tcl", LayerKind::Tcl},
    {"fc", LayerKind::Fc},         {"classifier", LayerKind::Classifier},
};

std::string kindName(LayerKind kind) {
    for (const auto& [name, k] : kKindNames)
        if (k == kind) return name;
    return "?";
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

LayerSpec LayerSpec::parse(std::string_view text) {
    text = trim(text);
    const auto open = text.find('(');
    const std::string_view head = trim(text.substr(0, open));
    const auto it = kKindNames.find(head);
    if (it == kKindNames.end()) throw ConfigError("unknown layer '" + std::string(text) + "'");
    LayerSpec spec{it->second, {}};
    if (open == std::string_view::npos) return spec;
    if (text.back() != ')') throw ConfigError("unterminated argument list in '" + std::string(text) + "'");
    std::string_view args = text.substr(open + 1, text.size() - open - 2);
    while (!args.empty()) {
        const auto comma = args.find(',');
        const std::string_view tok = trim(args.substr(0, comma));
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
            throw ConfigError("bad layer argument '" + std::string(tok) + "' in '" + std::string(text) + "'");
        spec.args.push_back(v);
        if (comma == std::string_view::npos) break;
        args.remove_prefix(comma + 1);
    }
    return spec;
}

std::string LayerSpec::toString() const {
    std::string s = kindName(kind);
    if (args.empty()) return s;
    s += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(args[i]);
    }
    return s + ')';
}

std::vector<LayerSpec> parseLayerList(std::string_view text) {
    std::vector<LayerSpec> out;
    std::size_t depth = 0, start = std::string_view::npos;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        const char c = i < text.size() ? text[i] : ' ';
        if (c == '(') ++depth;
        if (c == ')' && depth > 0) --depth;
        const bool sep = depth == 0 && (std::isspace(static_cast<unsigned char>(c)) || c == ';');
        if (!sep && start == std::string_view::npos) start = i;
        if (sep && start != std::string_view::npos) {
            out.push_back(LayerSpec::parse(text.substr(start, i - start)));
            start = std::string_view::npos;
        }
    }
    return out;
}

std::string formatLayerList(const std::vector<LayerSpec>& layers) {
    std::string s;
    for (const auto& l : layers) {
        if (!s.empty()) s += ' ';
        s += l.toString();
    }
    return s;
}

std::string toString(Variant v) {
    switch (v) {
        case Variant::Baseline: return "baseline";
        case Variant::AddedTcl: return "added-tcl";
        case Variant::Substitute1: return "substitute-1";
        case Variant::Substitute2: return "substitute-2";
    }
    return "baseline";
}

Variant parseVariant(std::string_view s) {
    for (Variant v : {Variant::Baseline, Variant::AddedTcl, Variant::Substitute1, Variant::Substitute2})
        if (toString(v) == s) return v;
    throw ConfigError("unknown variant '" + std::string(s) + "'");
}

std::string toString(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

Precision parsePrecision(std::string_view s) {
    if (s == "f32") return Precision::F32;
    if (s == "f64") return Precision::F64;
    throw ConfigError("unknown precision '" + std::string(s) + "' (expected f32 or f64)");
}

std::vector<ResolvedLayer> resolveNetwork(const NetworkConfig& config) {
    if (config.inputShape.empty()) throw ConfigError("network input shape is empty");
    for (auto d : config.inputShape)
        if (d == 0) throw ConfigError("network input shape has a zero dimension");
    if (config.layers.empty()) throw ConfigError("network has no layers");

    // Expand with batch norms around every TCL; remember where each came from.
    std::vector<std::pair<LayerSpec, std::size_t>> expanded;
    const auto& specs = config.layers;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const bool tcl = specs[i].kind == LayerKind::Tcl;
        if (tcl && config.autoBatchNorm && (expanded.empty() || expanded.back().first.kind != LayerKind::BatchNorm))
            expanded.push_back({LayerSpec{LayerKind::BatchNorm, {}}, i});
        expanded.push_back({specs[i], i});
        if (tcl && config.autoBatchNorm && (i + 1 == specs.size() || specs[i + 1].kind != LayerKind::BatchNorm))
            expanded.push_back({LayerSpec{LayerKind::BatchNorm, {}}, i});
    }

    std::vector<ResolvedLayer> out;
    std::map<LayerKind, std::size_t> counters;
    Shape shape = config.inputShape;
    for (std::size_t e = 0; e < expanded.size(); ++e) {
        const auto& [spec, origin] = expanded[e];
        auto fail = [&, origin = origin, &spec = spec](const std::string& why) -> ConfigError {
            return ConfigError("layer " + std::to_string(origin) + " (" + spec.toString() + "): " + why);
        };
        auto needArgs = [&](std::size_t n) {
            if (spec.args.size() != n) throw fail("expected " + std::to_string(n) + " argument(s)");
        };
        for (auto a : spec.args)
            if (a == 0 && spec.kind != LayerKind::Conv) throw fail("arguments must be positive");

        Shape next;
        switch (spec.kind) {
            case LayerKind::Conv: {
                needArgs(4);
                if (spec.args[0] == 0 || spec.args[1] == 0 || spec.args[2] == 0)
                    throw fail("channels, kernel and stride must be positive");
                if (shape.size() != 3) throw fail("expects a (C,H,W) input, got " + shapeToString(shape));
                const ConvGeometry g{spec.args[2], spec.args[3]};
                try {
                    next = {spec.args[0], convOutputSize(shape[1], spec.args[1], g),
                            convOutputSize(shape[2], spec.args[1], g)};
                } catch (const ShapeError& err) {
                    throw fail(err.what());
                }
                break;
            }
            case LayerKind::MaxPool:
                needArgs(1);
                if (shape.size() != 3 || shape[1] % spec.args[0] || shape[2] % spec.args[0])
                    throw fail("window does not tile input " + shapeToString(shape));
                next = {shape[0], shape[1] / spec.args[0], shape[2] / spec.args[0]};
                break;
            case LayerKind::Relu:
            case LayerKind::BatchNorm:
                needArgs(0);
                next = shape;
                break;
            case LayerKind::Flatten:
                needArgs(0);
                next = {shapeSize(shape)};
                break;
            case LayerKind::Tcl:
                if (spec.args.size() != shape.size())
                    throw fail("needs one rank per input mode of " + shapeToString(shape));
                next = Shape(spec.args.begin(), spec.args.end());
                break;
            case LayerKind::Fc:
            case LayerKind::Classifier:
                needArgs(1);
                next = {spec.args[0]};
                break;
        }
        if (spec.kind == LayerKind::Classifier && e + 1 != expanded.size())
            throw fail("classifier must be the last layer");

        const std::size_t n = ++counters[spec.kind];
        std::string name = spec.kind == LayerKind::Classifier ? "classifier" : kindName(spec.kind) + std::to_string(n);
        if (spec.kind == LayerKind::BatchNorm) name = "bn" + std::to_string(n);
        out.push_back({spec, std::move(name), shape, next});
        shape = std::move(next);
    }
    if (out.back().spec.kind != LayerKind::Classifier)
        throw ConfigError("layer " + std::to_string(specs.size() - 1) + ": network must end with a classifier");
    return out;
}

void roundToFloat(Tensor& t) {
    for (auto& v : t.data()) v = static_cast<double>(static_cast<float>(v));
}

Network::Network(NetworkConfig config, std::uint64_t seed, Precision precision)
    : config_(std::move(config)), layout_(resolveNetwork(config_)), precision_(precision) {
    Rng rng(seed);
    for (const ResolvedLayer& l : layout_) {
        const auto& a = l.spec.args;
        switch (l.spec.kind) {
            case LayerKind::Conv:
                layers_.push_back(std::make_unique<Conv2d>(l.inputShape[0], a[0], a[1], ConvGeometry{a[2], a[3]}, rng));
                break;
            case LayerKind::MaxPool:
                layers_.push_back(std::make_unique<MaxPool2d>(a[0]));
                break;
            case LayerKind::Relu:
                layers_.push_back(std::make_unique<Relu>());
                break;
            case LayerKind::BatchNorm:
                layers_.push_back(std::make_unique<BatchNorm>(batchNormFeatures(l.inputShape, BnGranularity::PerChannel),
                                                              BatchNormOptions{BnGranularity::PerChannel}));
                break;
            case LayerKind::Flatten:
                layers_.push_back(std::make_unique<Flatten>());
                break;
            case LayerKind::Tcl: {
                FactorInit init = config_.tclInit;
                if (init == FactorInit::Identity && l.inputShape != l.outputShape)
                    throw ConfigError(l.name + ": identity initialization needs a size-preserving TCL");
                layers_.push_back(std::make_unique<TclLayer>(l.inputShape, l.outputShape, init, rng));
                break;
            }
            case LayerKind::Fc:
            case LayerKind::Classifier:
                layers_.push_back(std::make_unique<Linear>(shapeSize(l.inputShape), a[0], rng,
                                                           l.spec.kind == LayerKind::Fc ? "fc" : "classifier"));
                break;
        }
    }
    roundParameters();
}

void Network::roundParameters() {
    if (precision_ != Precision::F32) return;
    for (auto& p : parameters()) roundToFloat(p.param->value);
}

Tensor Network::forward(const Tensor& x, Phase phase) {
    if (x.order() != config_.inputShape.size() + 1 ||
        !std::equal(config_.inputShape.begin(), config_.inputShape.end(), x.shape().begin() + 1)) {
        throw ShapeError("network expects (batch, " + shapeToString(config_.inputShape) + ") input, got " +
                         shapeToString(x.shape()));
    }
    Tensor h = x;
    if (precision_ == Precision::F32) roundToFloat(h);
    for (auto& layer : layers_) {
        h = layer->forward(h, phase);
        if (precision_ == Precision::F32) roundToFloat(h);
    }
    return h;
}

Tensor Network::backward(const Tensor& upstream) {
    Tensor g = upstream;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        g = (*it)->backward(g);
        if (precision_ == Precision::F32) {
            roundToFloat(g);
            for (Parameter* p : (*it)->parameters()) roundToFloat(p->grad);
        }
    }
    return g;
}

std::vector<NamedParameter> Network::parameters() {
    std::vector<NamedParameter> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        for (Parameter* p : layers_[i]->parameters()) out.push_back({layout_[i].name + "." + p->name, p});
    return out;
}

std::size_t Network::parameterCount() {
    std::size_t n = 0;
    for (auto& l : layers_) n += l->parameterCount();
    return n;
}

Network buildNetwork(const NetworkConfig& config, std::uint64_t seed, Precision precision) {
    return Network(config, seed, precision);
}

void validateTrainConfig(const TrainConfig& c) {
    if (c.epochs == 0) throw ConfigError("train.epochs must be positive");
    if (c.batchSize < 2) throw ConfigError("train.batch_size must be at least 2 (batch norm)");
    if (!(c.learningRate > 0.0) || !std::isfinite(c.learningRate)) throw ConfigError("train.lr must be positive");
    if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw ConfigError("train.momentum must be in [0, 1)");
    if (!(c.weightDecay >= 0.0) || !std::isfinite(c.weightDecay))
        throw ConfigError("train.weight_decay must be non-negative");
}

double learningRateAt(const TrainConfig& c, std::size_t epoch) {
    double lr = c.learningRate;
    if (!c.stepDecay) return lr;
    // Epochs past the 50% and 75% marks.
    if (2 * (epoch - 1) >= c.epochs) lr *= 0.1;
    if (4 * (epoch - 1) >= 3 * c.epochs) lr *= 0.1;
    return lr;
}

void sgdUpdate(Tensor& weights, Tensor& velocity, const Tensor& grad, const SgdSettings& s) {
    if (weights.shape() != grad.shape() || weights.shape() != velocity.shape())
        throw ShapeError("sgd: gradient " + shapeToString(grad.shape()) + " does not match parameter " +
                         shapeToString(weights.shape()));
    for (std::size_t i = 0; i < weights.size(); ++i) {
        velocity[i] = s.momentum * velocity[i] - s.learningRate * (grad[i] + s.weightDecay * weights[i]);
        weights[i] += velocity[i];
    }
}

void SgdOptimizer::step(Network& network, const SgdSettings& settings) {
    auto params = network.parameters();
    for (const auto& p : params) {
        for (double g : p.param->grad.data())
            if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + p.name);
    }
    if (velocity_.empty()) {
        for (const auto& p : params) velocity_.emplace_back(p.param->value.shape());
    }
    for (std::size_t i = 0; i < params.size(); ++i) sgdUpdate(params[i].param->value, velocity_[i], params[i].param->grad, settings);
    network.roundParameters();
}

std::vector<int> argmaxRows(const Tensor& logits) {
    const std::size_t rows = logits.dim(0), cols = logits.dim(1);
    std::vector<int> out(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < cols; ++c)
            if (logits[i * cols + c] > logits[i * cols + best]) best = c;
        out[i] = static_cast<int>(best);
    }
    return out;
}

Evaluation evaluate(Network& network, const Dataset& data, std::size_t batchSize) {
    if (data.size() == 0) throw ConsistencyError("cannot evaluate on an empty dataset");
    Evaluation ev;
    std::size_t correct = 0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < data.size(); start += batchSize) {
        const std::size_t end = std::min(data.size(), start + batchSize);
        idx.resize(end - start);
        for (std::size_t i = start; i < end; ++i) idx[i - start] = i;
        const Tensor logits = network.forward(gatherImages(data, idx), Phase::Eval);
        const std::vector<int> labels = gatherLabels(data, idx);
        ev.loss += softmaxCrossEntropy(logits, labels).loss * static_cast<double>(idx.size());
        const auto pred = argmaxRows(logits);
        for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
    }
    ev.loss /= static_cast<double>(data.size());
    ev.top1 = static_cast<double>(correct) / static_cast<double>(data.size());
    return ev;
}

Trainer::Trainer(Network& network, TrainConfig config) : network_(network), config_(std::move(config)) {
    if (config_.batchSize == 0) throw ConfigError("batch size must be positive");
}

EpochMetrics Trainer::trainEpoch(const Dataset& trainSet, const Dataset* testSet) {
    if (trainSet.size() == 0) throw ConsistencyError("training set is empty");
    const auto started = std::chrono::steady_clock::now();
    ++epoch_;
    const SgdSettings sgd{learningRateAt(config_, epoch_), config_.momentum, config_.weightDecay};

    std::vector<std::size_t> order(trainSet.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(config_.seed * 0x9E3779B97F4A7C15ULL + epoch_);
    for (std::size_t i = order.size(); i-- > 1;) {
        std::uniform_int_distribution<std::size_t> pick(0, i);
        std::swap(order[i], order[pick(rng)]);
    }

    double lossSum = 0.0;
    std::size_t seen = 0, correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config_.batchSize) {
        const std::size_t end = std::min(order.size(), start + config_.batchSize);
        if (end - start == 1 && start > 0) break;
        const std::span<const std::size_t> idx(order.data() + start, end - start);
        const std::vector<int> labels = gatherLabels(trainSet, idx);
        try {
            const Tensor logits = network_.forward(gatherImages(trainSet, idx), Phase::Train);
            LossResult loss = softmaxCrossEntropy(logits, labels);
            network_.backward(loss.inputGrad);
            optimizer_.step(network_, sgd);
            lossSum += loss.loss * static_cast<double>(idx.size());
            const auto pred = argmaxRows(logits);
            for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
            seen += idx.size();
        } catch (const NumericError& e) {
            throw NumericError("epoch " + std::to_string(epoch_) + ", batch at " + std::to_string(start) + ": " + e.what());
        } catch (const ShapeError& e) {
            throw ShapeError("epoch " + std::to_string(epoch_) + ", batch at " + std::to_string(start) + ": " + e.what());
        }
    }

    EpochMetrics m;
    m.epoch = epoch_;
    m.trainLoss = lossSum / static_cast<double>(seen);
    m.trainTop1 = static_cast<double>(correct) / static_cast<double>(seen);
    if (testSet) m.testTop1 = evaluate(network_, *testSet).top1;
    m.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return m;
}

TrainMetrics train(Network& network, const TrainConfig& config, const Dataset& trainSet, const Dataset* testSet,
                   const std::function<void(const EpochMetrics&)>& onEpoch) {
    Trainer trainer(network, config);
    TrainMetrics metrics;
    for (std::size_t e = 0; e < config.epochs; ++e) {
        metrics.epochs.push_back(trainer.trainEpoch(trainSet, testSet));
        if (onEpoch) onEpoch(metrics.epochs.back());
    }
    return metrics;
}

}  // namespace tcl
