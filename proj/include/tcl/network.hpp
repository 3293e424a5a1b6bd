#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tcl/dataset.hpp"
#include "tcl/layers/layer.hpp"
#include "tcl/layers/tcl_layer.hpp"

namespace tcl {

enum class LayerKind { Conv, MaxPool, Relu, BatchNorm, Flatten, Tcl, Fc, Classifier };

/// One entry of a layer stack, written in configs as e.g. `conv(64,3,1,1)`,
/// `maxpool(2)`, `relu`, `batchnorm`, `flatten`, `tcl(16,4,4)`, `fc(256)`,
/// `classifier(10)`.
struct LayerSpec {
    LayerKind kind = LayerKind::Relu;
    std::vector<std::size_t> args;

    static LayerSpec parse(std::string_view text);
    std::string toString() const;
    bool operator==(const LayerSpec&) const = default;
};

std::vector<LayerSpec> parseLayerList(std::string_view text);
std::string formatLayerList(const std::vector<LayerSpec>& layers);

enum class Variant { Baseline, AddedTcl, Substitute1, Substitute2 };
std::string toString(Variant v);
Variant parseVariant(std::string_view s);

enum class Precision { F32, F64 };
std::string toString(Precision p);
Precision parsePrecision(std::string_view s);

struct NetworkConfig {
    std::string name = "custom";
    Shape inputShape;  // (C, H, W) or any non-batch shape
    Variant variant = Variant::Baseline;
    std::vector<LayerSpec> layers;
    /// Wrap every TCL in batch norms. Only disable for ablations.
    bool autoBatchNorm = true;
    /// Size-preserving TCLs may start at the identity.
    FactorInit tclInit = FactorInit::Gaussian;
    /// Preset this configuration is compared against for space savings.
    std::string baseline;
};

/// A layer spec after batch-norm insertion and shape inference. Shapes
/// exclude the batch mode.
struct ResolvedLayer {
    LayerSpec spec;
    std::string name;
    Shape inputShape;
    Shape outputShape;
};

/// Inserts the batch norms around TCLs and checks that shapes chain.
/// Throws ConfigError naming the offending layer index.
std::vector<ResolvedLayer> resolveNetwork(const NetworkConfig& config);

std::vector<std::string> presetNames();
NetworkConfig preset(std::string_view name);

struct NamedParameter {
    std::string name;  // "<layer>.<parameter>"
    Parameter* param;
};

class Network {
public:
    Network(NetworkConfig config, std::uint64_t seed, Precision precision = Precision::F64);

    Tensor forward(const Tensor& x, Phase phase);
    /// Gradient of the loss with respect to the logits in, input gradient out.
    Tensor backward(const Tensor& upstream);

    std::vector<NamedParameter> parameters();
    std::size_t parameterCount();

    const NetworkConfig& config() const { return config_; }
    const std::vector<ResolvedLayer>& layout() const { return layout_; }
    std::size_t size() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_.at(i); }
    Precision precision() const { return precision_; }

    /// Rounds every parameter to the working precision.
    void roundParameters();

private:
    NetworkConfig config_;
    std::vector<ResolvedLayer> layout_;
    std::vector<std::unique_ptr<Layer>> layers_;
    Precision precision_;
};

Network buildNetwork(const NetworkConfig& config, std::uint64_t seed, Precision precision = Precision::F64);

/// Rounds every entry to the nearest float.
void roundToFloat(Tensor& t);

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batchSize = 128;
    double learningRate = 0.01;
    double momentum = 0.9;
    double weightDecay = 5e-4;
    /// Multiply the learning rate by 0.1 at 50% and 75% of the epochs.
    bool stepDecay = true;
    std::uint64_t seed = 0;
    Precision precision = Precision::F64;
    std::string datasetRef = "synth";
};

void validateTrainConfig(const TrainConfig& config);
double learningRateAt(const TrainConfig& config, std::size_t epoch);  // 1-based epoch

struct SgdSettings {
    double learningRate = 0.01;
    double momentum = 0.9;
    double weightDecay = 0.0;
};

/// v <- momentum * v - lr * (g + weightDecay * w);  w <- w + v.
void sgdUpdate(Tensor& weights, Tensor& velocity, const Tensor& grad, const SgdSettings& settings);

/// Momentum SGD over a network's parameters; keeps one velocity per parameter.
class SgdOptimizer {
public:
    /// Throws NumericError naming the parameter if a gradient is not finite.
    void step(Network& network, const SgdSettings& settings);

private:
    std::vector<Tensor> velocity_;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double trainLoss = 0.0;
    double trainTop1 = 0.0;
    double testTop1 = 0.0;
    double wallSeconds = 0.0;

    bool operator==(const EpochMetrics&) const = default;
};

struct TrainMetrics {
    std::vector<EpochMetrics> epochs;
};

struct Evaluation {
    double loss = 0.0;
    double top1 = 0.0;
};

/// Index of the largest logit per row; ties go to the lowest class.
std::vector<int> argmaxRows(const Tensor& logits);

/// Eval-mode loss and top-1 accuracy.
Evaluation evaluate(Network& network, const Dataset& data, std::size_t batchSize = 256);

/// Owns the optimizer state and epoch counter for one training run.
class Trainer {
public:
    Trainer(Network& network, TrainConfig config);

    /// One pass over `train` in a seed-determined shuffled order. A
    /// trailing batch of a single sample is dropped. If `test` is given its
    /// top-1 is recorded.
    EpochMetrics trainEpoch(const Dataset& train, const Dataset* test = nullptr);

    std::size_t epoch() const { return epoch_; }

private:
    Network& network_;
    TrainConfig config_;
    SgdOptimizer optimizer_;
    std::size_t epoch_ = 0;
};

/// Full run: config.epochs epochs, calling `onEpoch` after each.
TrainMetrics train(Network& network, const TrainConfig& config, const Dataset& trainSet, const Dataset* testSet,
                   const std::function<void(const EpochMetrics&)>& onEpoch = {});

}  // namespace tcl
