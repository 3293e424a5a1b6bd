#include "tcl/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "tcl/analysis.hpp"
#include "tcl/data.hpp"
#include "tcl/error.hpp"
#include "tcl/layers/gradcheck.hpp"
#include "tcl/metrics.hpp"

namespace tcl {

namespace fs = std::filesystem;

namespace {

void writeText(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failure on " + path.string());
}

std::pair<Dataset, Dataset> loadData(const RunManifest& m) {
    Dataset train, test;
    if (m.data.kind == "synth") {
        train = synthDataset(m.data.synth, "train");
        SynthSpec testSpec = m.data.synth;
        testSpec.numSamples = m.data.testSamples;
        test = synthDataset(testSpec, "test");
    } else {
        train = loadIdx(m.data.trainImages, m.data.trainLabels, "train");
        test = loadIdx(m.data.testImages, m.data.testLabels, "test");
        test.numClasses = train.numClasses = std::max(train.numClasses, test.numClasses);
    }
    validateDataset(train);
    validateDataset(test);
    if (m.data.normalize) {
        const ChannelStats stats = train.stats;
        train = normalized(train, stats);
        test = normalized(test, stats);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace

RunResult executeRun(const RunManifest& m, std::ostream& log) {
    auto [trainSet, testSet] = loadData(m);
    const auto layout = resolveNetwork(m.network);
    if (trainSet.sampleShape() != m.network.inputShape)
        throw ConfigError("dataset samples are " + shapeToString(trainSet.sampleShape()) +
                          " but the network expects " + shapeToString(m.network.inputShape));
    if (layout.back().outputShape[0] != trainSet.numClasses)
        throw ConfigError("classifier has " + std::to_string(layout.back().outputShape[0]) +
                          " outputs but the dataset has " + std::to_string(trainSet.numClasses) + " classes");
    if (m.train.batchSize > trainSet.size()) throw ConfigError("train.batch_size exceeds the training set size");

    const fs::path dir(m.outDir);
    fs::create_directories(dir);
    RunResult r;
    r.manifestPath = (dir / "manifest.txt").string();
    r.metricsPath = (dir / "metrics.txt").string();
    r.reportPath = (dir / "report.txt").string();
    writeText(r.manifestPath, manifestToConfig(m).serialize());
    writeText(r.reportPath, formatCostReport(analyzeWithSavings(m.network)));
    fs::remove(r.metricsPath);

    Network net = buildNetwork(m.network, m.train.seed, m.train.precision);
    MetricsFile sink(r.metricsPath);
    Trainer trainer(net, m.train);
    for (std::size_t e = 0; e < m.train.epochs; ++e) {
        EpochMetrics em = trainer.trainEpoch(trainSet, &testSet);
        if (!m.wallClock) em.wallSeconds = 0.0;
        sink.append(em);
        log << formatMetricsRecord(em) << '\n';
        r.metrics.epochs.push_back(em);
    }
    return r;
}

namespace {

struct CommonFlags {
    std::string config;
    std::string preset;
    std::string out;
    std::string precision;
    std::optional<std::uint64_t> seed;
};

NetworkConfig networkFrom(const CommonFlags& f) {
    if (!f.preset.empty() && !f.config.empty()) throw ConfigError("give either --preset or --config, not both");
    if (!f.preset.empty()) return preset(f.preset);
    if (!f.config.empty()) return resolveManifest(KeyValueConfig::load(f.config)).network;
    throw ConfigError("analyze needs --preset NAME or --config PATH");
}

int cmdTrain(const CommonFlags& f, std::optional<std::size_t> epochs, std::ostream& out) {
    KeyValueConfig c = f.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(f.config);
    if (!f.preset.empty()) {
        // A preset named on the command line replaces the configured layer stack.
        KeyValueConfig stripped;
        for (const auto& [k, v] : c.entries())
            if (!k.starts_with("network.")) stripped.set(k, v);
        c = stripped;
        c.set("network.preset", f.preset);
    }
    if (f.seed) c.set("train.seed", std::to_string(*f.seed));
    if (!f.out.empty()) c.set("output.dir", f.out);
    if (!f.precision.empty()) c.set("train.precision", f.precision);
    if (epochs) c.set("train.epochs", std::to_string(*epochs));
    const RunManifest m = resolveManifest(c);
    const RunResult r = executeRun(m, out);
    out << "wrote " << r.manifestPath << ", " << r.metricsPath << ", " << r.reportPath << '\n';
    return 0;
}

int cmdGradcheck(std::uint64_t seed, std::size_t repeats, std::ostream& out) {
    bool ok = true;
    for (const auto& e : gradientSuite(seed, repeats)) {
        out << "gradcheck layer=" << e.layer << " worst_rel_err=" << formatDouble(e.worst)
            << " tolerance=" << formatDouble(e.tolerance) << (e.passed() ? " ok" : " FAIL") << '\n';
        ok = ok && e.passed();
    }
    return ok ? 0 : 2;
}

int cmdAnalyze(const CommonFlags& f, std::ostream& out) {
    const std::string text = formatCostReport(analyzeWithSavings(networkFrom(f)));
    out << text;
    if (!f.out.empty()) {
        fs::create_directories(f.out);
        writeText(fs::path(f.out) / "report.txt", text);
    }
    return 0;
}

int cmdTables(const std::vector<int>& ids, const CommonFlags& f, std::ostream& out) {
    std::string text;
    for (int id : ids.empty() ? std::vector<int>{1, 2, 3} : ids) text += formatTable(reproduceTable(id));
    out << text;
    if (!f.out.empty()) {
        fs::create_directories(f.out);
        writeText(fs::path(f.out) / "tables.txt", text);
    }
    return 0;
}

int cmdSynth(const CommonFlags& f, std::ostream& out) {
    KeyValueConfig c = f.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(f.config);
    if (f.seed) c.set("data.seed", std::to_string(*f.seed));
    const RunManifest m = resolveManifest(c);
    if (m.data.kind != "synth") throw ConfigError("synth needs data.kind = synth");
    const fs::path dir(f.out.empty() ? "synth" : f.out);
    fs::create_directories(dir);
    const Dataset train = synthDataset(m.data.synth, "train");
    SynthSpec testSpec = m.data.synth;
    testSpec.numSamples = m.data.testSamples;
    const Dataset test = synthDataset(testSpec, "test");
    writeIdxImages((dir / "train-images.idx").string(), train.images);
    writeIdxLabels((dir / "train-labels.idx").string(), train.labels);
    writeIdxImages((dir / "test-images.idx").string(), test.images);
    writeIdxLabels((dir / "test-labels.idx").string(), test.labels);
    out << "wrote " << train.size() << " train and " << test.size() << " test samples of shape "
        << shapeToString(train.sampleShape()) << " to " << dir.string() << '\n';
    return 0;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tensor contraction layer toolkit", "tclnet"};
    app.require_subcommand(1);

    CommonFlags trainFlags, analyzeFlags, tableFlags, synthFlags;
    std::optional<std::size_t> epochs;
    std::uint64_t gradSeed = 0;
    std::size_t repeats = 20;
    std::vector<int> tableIds;

    auto* train = app.add_subcommand("train", "Train a network from a config or preset");
    train->add_option("--config", trainFlags.config, "Config file (key = value)");
    train->add_option("--preset", trainFlags.preset, "Network preset");
    train->add_option("--seed", trainFlags.seed, "Training seed");
    train->add_option("--out", trainFlags.out, "Output directory");
    train->add_option("--precision", trainFlags.precision, "f32 or f64");
    train->add_option("--epochs", epochs, "Number of epochs");

    auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every layer's backward pass");
    grad->add_option("--seed", gradSeed, "Base seed");
    grad->add_option("--repeats", repeats, "Seeds per layer")->check(CLI::PositiveNumber);

    auto* analyzeCmd = app.add_subcommand("analyze", "Parameter and FLOP report for a network");
    analyzeCmd->add_option("--config", analyzeFlags.config, "Config file");
    analyzeCmd->add_option("--preset", analyzeFlags.preset, "Network preset");
    analyzeCmd->add_option("--out", analyzeFlags.out, "Also write report.txt here");

    auto* tables = app.add_subcommand("tables", "Recompute the space-savings tables");
    tables->add_option("table", tableIds, "Table number (1, 2 or 3); all when omitted")->check(CLI::Range(1, 3));
    tables->add_option("--out", tableFlags.out, "Also write tables.txt here");

    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset as IDX files");
    synth->add_option("--config", synthFlags.config, "Config file (data.* keys)");
    synth->add_option("--seed", synthFlags.seed, "Dataset seed");
    synth->add_option("--out", synthFlags.out, "Output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (*train) return cmdTrain(trainFlags, epochs, out);
        if (*grad) return cmdGradcheck(gradSeed, repeats, out);
        if (*analyzeCmd) return cmdAnalyze(analyzeFlags, out);
        if (*tables) return cmdTables(tableIds, tableFlags, out);
        if (*synth) return cmdSynth(synthFlags, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace tcl
