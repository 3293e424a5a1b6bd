#include "tcl/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tcl/error.hpp"

namespace tcl {

const char* const kCodeVersion = "tclnet 1.0.0";

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const std::set<std::string>& knownKeys() {
    static const std::set<std::string> keys{
        "network.preset",     "network.name",        "network.input",       "network.layers",
        "network.variant",    "network.auto_batchnorm", "network.tcl_init",  "network.baseline",
        "train.epochs",       "train.batch_size",    "train.lr",            "train.momentum",
        "train.weight_decay", "train.step_decay",    "train.seed",          "train.precision",
        "train.dataset",      "data.kind",           "data.classes",        "data.train_samples",
        "data.test_samples",  "data.shape",          "data.seed",           "data.noise",
        "data.normalize",     "data.train_images",   "data.train_labels",   "data.test_images",
        "data.test_labels",   "output.dir",          "output.wall_clock",   "run.version",
    };
    return keys;
}

std::size_t toSize(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        const unsigned long long n = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return static_cast<std::size_t>(n);
    } catch (const std::logic_error&) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
}

double toDouble(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::logic_error&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

bool toBool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

Shape toShape(const std::string& key, const std::string& v) {
    Shape s;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ',')) s.push_back(toSize(key, trim(part)));
    if (s.empty()) throw ConfigError(key + ": empty shape");
    for (auto d : s)
        if (d == 0) throw ConfigError(key + ": shape entries must be positive");
    return s;
}

std::string shapeValue(const Shape& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out;
}

}  // namespace

std::string formatDouble(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& source) {
    KeyValueConfig c;
    std::istringstream in(text);
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineNo) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty() || key.find(' ') != std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineNo) + ": bad key '" + key + "'");
        if (c.has(key)) throw ConfigError(source + ":" + std::to_string(lineNo) + ": duplicate key '" + key + "'");
        c.entries_[key] = trim(line.substr(eq + 1));
    }
    return c;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

const std::string& KeyValueConfig::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key " + key);
    return it->second;
}

std::string KeyValueConfig::serialize() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

RunManifest resolveManifest(const KeyValueConfig& c) {
    for (const auto& [k, v] : c.entries())
        if (!knownKeys().count(k)) throw ConfigError("unknown config key '" + k + "'");

    RunManifest m;
    m.codeVersion = kCodeVersion;
    auto str = [&](const std::string& k, std::string def) { return c.has(k) ? c.get(k) : def; };

    if (c.has("network.preset")) {
        m.presetName = c.get("network.preset");
        m.network = preset(m.presetName);
    } else if (!c.has("network.layers")) {
        m.presetName = "synth-baseline";
        m.network = preset(m.presetName);
    }
    if (c.has("network.layers")) m.network.layers = parseLayerList(c.get("network.layers"));
    if (c.has("network.input")) m.network.inputShape = toShape("network.input", c.get("network.input"));
    if (c.has("network.name")) m.network.name = c.get("network.name");
    if (c.has("network.variant")) m.network.variant = parseVariant(c.get("network.variant"));
    if (c.has("network.auto_batchnorm"))
        m.network.autoBatchNorm = toBool("network.auto_batchnorm", c.get("network.auto_batchnorm"));
    if (c.has("network.tcl_init")) {
        const std::string v = c.get("network.tcl_init");
        if (v == "gaussian") m.network.tclInit = FactorInit::Gaussian;
        else if (v == "identity") m.network.tclInit = FactorInit::Identity;
        else throw ConfigError("network.tcl_init: expected gaussian or identity, got '" + v + "'");
    }
    if (c.has("network.baseline")) m.network.baseline = c.get("network.baseline");
    resolveNetwork(m.network);

    TrainConfig& t = m.train;
    if (c.has("train.epochs")) t.epochs = toSize("train.epochs", c.get("train.epochs"));
    if (c.has("train.batch_size")) t.batchSize = toSize("train.batch_size", c.get("train.batch_size"));
    if (c.has("train.lr")) t.learningRate = toDouble("train.lr", c.get("train.lr"));
    if (c.has("train.momentum")) t.momentum = toDouble("train.momentum", c.get("train.momentum"));
    if (c.has("train.weight_decay")) t.weightDecay = toDouble("train.weight_decay", c.get("train.weight_decay"));
    if (c.has("train.step_decay")) t.stepDecay = toBool("train.step_decay", c.get("train.step_decay"));
    if (c.has("train.seed")) t.seed = toSize("train.seed", c.get("train.seed"));
    if (c.has("train.precision")) t.precision = parsePrecision(c.get("train.precision"));
    validateTrainConfig(t);

    DataConfig& d = m.data;
    d.kind = str("data.kind", "synth");
    t.datasetRef = str("train.dataset", d.kind);
    if (d.kind == "synth") {
        if (c.has("data.classes")) d.synth.numClasses = toSize("data.classes", c.get("data.classes"));
        if (c.has("data.train_samples")) d.synth.numSamples = toSize("data.train_samples", c.get("data.train_samples"));
        if (c.has("data.test_samples")) d.testSamples = toSize("data.test_samples", c.get("data.test_samples"));
        if (c.has("data.shape")) d.synth.shape = toShape("data.shape", c.get("data.shape"));
        else d.synth.shape = m.network.inputShape;
        if (c.has("data.seed")) d.synth.seed = toSize("data.seed", c.get("data.seed"));
        if (c.has("data.noise")) d.synth.noise = toDouble("data.noise", c.get("data.noise"));
        if (d.synth.numClasses == 0 || d.synth.numSamples == 0 || d.testSamples == 0)
            throw ConfigError("synthetic data needs positive class and sample counts");
        if (!(d.synth.noise >= 0.0)) throw ConfigError("data.noise must be non-negative");
    } else if (d.kind == "idx") {
        d.trainImages = c.get("data.train_images");
        d.trainLabels = c.get("data.train_labels");
        d.testImages = c.get("data.test_images");
        d.testLabels = c.get("data.test_labels");
    } else {
        throw ConfigError("data.kind: expected synth or idx, got '" + d.kind + "'");
    }
    if (c.has("data.normalize")) d.normalize = toBool("data.normalize", c.get("data.normalize"));

    m.outDir = str("output.dir", "run");
    if (c.has("output.wall_clock")) m.wallClock = toBool("output.wall_clock", c.get("output.wall_clock"));
    return m;
}

KeyValueConfig manifestToConfig(const RunManifest& m) {
    KeyValueConfig c;
    if (!m.presetName.empty()) c.set("network.preset", m.presetName);
    c.set("network.name", m.network.name);
    c.set("network.input", shapeValue(m.network.inputShape));
    c.set("network.layers", formatLayerList(m.network.layers));
    c.set("network.variant", toString(m.network.variant));
    c.set("network.auto_batchnorm", m.network.autoBatchNorm ? "true" : "false");
    c.set("network.tcl_init", m.network.tclInit == FactorInit::Identity ? "identity" : "gaussian");
    if (!m.network.baseline.empty()) c.set("network.baseline", m.network.baseline);

    c.set("train.epochs", std::to_string(m.train.epochs));
    c.set("train.batch_size", std::to_string(m.train.batchSize));
    c.set("train.lr", formatDouble(m.train.learningRate));
    c.set("train.momentum", formatDouble(m.train.momentum));
    c.set("train.weight_decay", formatDouble(m.train.weightDecay));
    c.set("train.step_decay", m.train.stepDecay ? "true" : "false");
    c.set("train.seed", std::to_string(m.train.seed));
    c.set("train.precision", toString(m.train.precision));
    c.set("train.dataset", m.train.datasetRef);

    c.set("data.kind", m.data.kind);
    if (m.data.kind == "synth") {
        c.set("data.classes", std::to_string(m.data.synth.numClasses));
        c.set("data.train_samples", std::to_string(m.data.synth.numSamples));
        c.set("data.test_samples", std::to_string(m.data.testSamples));
        c.set("data.shape", shapeValue(m.data.synth.shape));
        c.set("data.seed", std::to_string(m.data.synth.seed));
        c.set("data.noise", formatDouble(m.data.synth.noise));
    } else {
        c.set("data.train_images", m.data.trainImages);
        c.set("data.train_labels", m.data.trainLabels);
        c.set("data.test_images", m.data.testImages);
        c.set("data.test_labels", m.data.testLabels);
    }
    c.set("data.normalize", m.data.normalize ? "true" : "false");
    c.set("output.dir", m.outDir);
    c.set("output.wall_clock", m.wallClock ? "true" : "false");
    c.set("run.version", m.codeVersion);
    return c;
}

}  // namespace tcl
