#include "tcl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "tcl/error.hpp"
#include "tcl/layers/batch_norm.hpp"

namespace tcl {

namespace {

Count product(std::span<const std::size_t> v) {
    return std::accumulate(v.begin(), v.end(), Count{1}, [](Count a, std::size_t b) { return a * b; });
}

void checkPair(std::span<const std::size_t> dims, std::span<const std::size_t> ranks) {
    if (dims.size() != ranks.size())
        throw ShapeError("dims and ranks differ in length (" + std::to_string(dims.size()) + " vs " +
                         std::to_string(ranks.size()) + ")");
    if (dims.empty()) throw ShapeError("empty dims");
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (dims[k] == 0 || ranks[k] == 0) throw ShapeError("dims and ranks must be positive");
}

}  // namespace

Count tclParamCount(std::span<const std::size_t> dims, std::span<const std::size_t> ranks) {
    checkPair(dims, ranks);
    Count n = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) n += Count{dims[k]} * ranks[k];
    return n;
}

Count fcParamCount(std::span<const std::size_t> dims, std::size_t hidden, bool withBias) {
    return Count{hidden} * product(dims) + (withBias ? hidden : 0);
}

Count tclFlops(std::span<const std::size_t> dims, std::span<const std::size_t> ranks,
               std::span<const std::size_t> order) {
    checkPair(dims, ranks);
    std::vector<bool> seen(dims.size(), false);
    if (order.size() != dims.size()) throw InvalidModeError("application order is not a permutation");
    for (auto m : order) {
        if (m < 1 || m > dims.size() || seen[m - 1]) throw InvalidModeError("application order is not a permutation");
        seen[m - 1] = true;
    }
    std::vector<std::size_t> current(dims.begin(), dims.end());
    Count total = 0;
    for (auto m : order) {
        total += Count{ranks[m - 1]} * product(current);
        current[m - 1] = ranks[m - 1];
    }
    return total;
}

Count tclFlops(std::span<const std::size_t> dims, std::span<const std::size_t> ranks) {
    checkPair(dims, ranks);
    const std::size_t n = dims.size();
    Count total = 0;
    for (std::size_t k = 0; k < n; ++k) {
        Count term = 1;
        for (std::size_t i = 0; i <= k; ++i) term *= ranks[i];
        for (std::size_t j = k; j < n; ++j) term *= dims[j];
        total += term;
    }
    return total;
}

Count tclFlopsMin(std::span<const std::size_t> dims, std::span<const std::size_t> ranks) {
    checkPair(dims, ranks);
    std::vector<std::size_t> order(dims.size());
    std::iota(order.begin(), order.end(), std::size_t{1});
    Count best = tclFlops(dims, ranks, order);
    while (std::next_permutation(order.begin(), order.end())) best = std::min(best, tclFlops(dims, ranks, order));
    return best;
}

Count fcFlops(std::span<const std::size_t> dims, std::size_t hidden) { return Count{hidden} * product(dims); }

CostReport analyze(const NetworkConfig& config) {
    CostReport r;
    r.network = config.name;
    r.baseline = config.baseline;
    for (const ResolvedLayer& l : resolveNetwork(config)) {
        LayerCost c{l.name, l.spec.toString()};
        const auto& a = l.spec.args;
        switch (l.spec.kind) {
            case LayerKind::Conv: {
                const Count weights = Count{a[0]} * l.inputShape[0] * a[1] * a[1];
                c.params = weights + a[0];
                c.flops = weights * l.outputShape[1] * l.outputShape[2];
                break;
            }
            case LayerKind::BatchNorm:
                c.params = 2 * Count{batchNormFeatures(l.inputShape, BnGranularity::PerChannel)};
                break;
            case LayerKind::Tcl:
                c.params = tclParamCount(l.inputShape, l.outputShape);
                c.flops = tclFlops(l.inputShape, l.outputShape);
                c.fcBlockParams = c.params;
                break;
            case LayerKind::Fc:
            case LayerKind::Classifier:
                c.params = fcParamCount(l.inputShape, a[0], true);
                c.flops = fcFlops(l.inputShape, a[0]);
                c.fcBlockParams = fcParamCount(l.inputShape, a[0], false);
                break;
            case LayerKind::MaxPool:
            case LayerKind::Relu:
            case LayerKind::Flatten:
                break;
        }
        r.totalParams += c.params;
        r.totalFlops += c.flops;
        r.fcBlockParams += c.fcBlockParams;
        r.perLayer.push_back(std::move(c));
    }
    return r;
}

double spaceSavings(const CostReport& baseline, const CostReport& modified) {
    if (baseline.fcBlockParams == 0)
        throw UndefinedBaselineError("baseline '" + baseline.network + "' has no fully-connected parameters");
    return 1.0 - static_cast<double>(modified.fcBlockParams) / static_cast<double>(baseline.fcBlockParams);
}

CostReport analyzeWithSavings(const NetworkConfig& config) {
    CostReport r = analyze(config);
    if (!config.baseline.empty()) r.spaceSavings = spaceSavings(analyze(preset(config.baseline)), r);
    return r;
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string formatCostReport(const CostReport& r) {
    std::ostringstream os;
    for (const auto& l : r.perLayer) {
        os << "layer name=" << l.name << " spec=" << l.spec << " params=" << l.params << " flops=" << l.flops
           << " fc_block_params=" << l.fcBlockParams << '\n';
    }
    os << "total network=" << r.network << " params=" << r.totalParams << " flops=" << r.totalFlops
       << " fc_block_params=" << r.fcBlockParams << '\n';
    if (r.spaceSavings) {
        os << "savings baseline=" << r.baseline << " fraction=" << full(*r.spaceSavings)
           << " percent=" << fixed(100.0 * *r.spaceSavings, 2) << "%\n";
    }
    return os.str();
}

namespace {

struct PublishedRow {
    std::string label;
    std::string suffix;  // preset suffix after the family name
    double savings;
};

TableRow computeRow(const std::string& family, const PublishedRow& p, const std::string& reading) {
    const NetworkConfig cfg = preset(family + "-" + p.suffix);
    const double s = 100.0 * spaceSavings(analyze(preset(family + "-baseline")), analyze(cfg));
    return {p.label, cfg.name, reading, s, p.savings, s - p.savings};
}

}  // namespace

TableReport reproduceTable(int id) {
    TableReport t;
    t.id = id;
    if (id == 1 || id == 2) {
        const bool alex = id == 1;
        const std::string family = alex ? "alexnet-cifar" : "vgg-cifar";
        const std::size_t c = alex ? 256 : 512, c75 = c * 3 / 4, c50 = c / 2, c56 = c75 * 3 / 4;
        auto tcl = [](std::size_t ch) { return "TCL-(" + std::to_string(ch) + ",3,3)"; };
        const std::vector<double> published =
            alex ? std::vector<double>{0, -0.25, 43.28, 74.49, 62.77, 78.72, 90.25, 98.64, 99.22}
                 : std::vector<double>{0, -0.73, 42.99, 74.35, 45.8, 69.16, 85.98, 97.27, 98.43};
        const std::vector<PublishedRow> rows{
            {"Baseline / 4096 / 4096", "baseline", published[0]},
            {"Added TCL " + tcl(c) + " / 4096 / 4096", "added-" + std::to_string(c), published[1]},
            {"Added TCL " + tcl(c75) + " / 3072 / 3072", "added-" + std::to_string(c75), published[2]},
            {"Added TCL " + tcl(c50) + " / 2048 / 2048", "added-" + std::to_string(c50), published[3]},
            {"1 TCL substitution " + tcl(c) + " / 4096", "sub1-" + std::to_string(c), published[4]},
            {"1 TCL substitution " + tcl(c75) + " / 3072", "sub1-" + std::to_string(c75), published[5]},
            {"1 TCL substitution " + tcl(c50) + " / 2048", "sub1-" + std::to_string(c50), published[6]},
            {"2 TCL substitutions " + tcl(c) + " / " + tcl(c), "sub2-" + std::to_string(c) + "-" + std::to_string(c),
             published[7]},
            {"2 TCL substitutions " + tcl(c75) + " / " + tcl(c56),
             "sub2-" + std::to_string(c75) + "-" + std::to_string(c56), published[8]},
        };
        t.title = alex ? "AlexNet on CIFAR100, activation (256,3,3), 100 classes"
                       : "VGG-19 on CIFAR100, activation (512,3,3), 100 classes";
        const std::string reading = alex ? "(256,3,3)" : "(512,3,3)";
        for (const auto& r : rows) t.rows.push_back(computeRow(family, r, reading));
        return t;
    }
    if (id == 3) {
        t.title = "AlexNet on ImageNet, 1000 classes, computed under both activation-shape readings";
        for (std::size_t s : {5, 6}) {
            const std::string family = "alexnet-imagenet-s" + std::to_string(s);
            const std::string reading = "(256," + std::to_string(s) + "," + std::to_string(s) + ")";
            const std::string full = "TCL-" + reading;
            const std::vector<PublishedRow> rows{
                {"Baseline / 4096 / 4096", "baseline", 0.0},
                {"Added TCL " + full + " (size-preserving) / 4096 / 4096", "added-256", -0.11},
                {"Added TCL TCL-(200,5,5) / 3276 / 3276", "added-200", 35.36},
                {"TCL substitution " + full + " (size-preserving) / 4096", "sub1-256", 35.49},
            };
            for (const auto& r : rows) t.rows.push_back(computeRow(family, r, reading));
        }
        t.notes.push_back(
            "shape ambiguity: the activation is stated as (256,5,5), but the published Added TCL figure (-0.11) "
            "is only reproduced under (256,6,6) while the substitution figure (35.49) is reproduced under (256,5,5); "
            "both readings are listed");
        return t;
    }
    throw ConfigError("unknown table " + std::to_string(id) + " (expected 1, 2 or 3)");
}

std::string formatTable(const TableReport& t) {
    std::ostringstream os;
    os << "table " << t.id << ": " << t.title << '\n';
    for (const auto& r : t.rows) {
        os << "row label=\"" << r.label << "\" preset=" << r.preset << " shape=" << r.shapeReading
           << " computed=" << fixed(r.computed, 4) << " published=" << fixed(r.published, 2)
           << " delta=" << fixed(r.delta, 4) << '\n';
    }
    for (const auto& n : t.notes) os << "note " << n << '\n';
    return os.str();
}

}  // namespace tcl
