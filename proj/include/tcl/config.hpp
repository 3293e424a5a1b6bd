#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcl/data.hpp"
#include "tcl/network.hpp"

namespace tcl {

/// Flat `section.key = value` text; `#` starts a comment.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text, const std::string& source = "<config>");
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
    const std::map<std::string, std::string>& entries() const { return entries_; }

    /// Sorted `key = value` lines.
    std::string serialize() const;

private:
    std::map<std::string, std::string> entries_;
};

struct DataConfig {
    std::string kind = "synth";  // synth | idx
    SynthSpec synth;
    std::size_t testSamples = 60;
    std::string trainImages, trainLabels, testImages, testLabels;
    bool normalize = true;
};

/// Everything a `train` run needs, with no implicit defaults left.
struct RunManifest {
    std::string presetName;
    NetworkConfig network;
    TrainConfig train;
    DataConfig data;
    std::string outDir = "run";
    bool wallClock = true;
    std::string codeVersion;
};

extern const char* const kCodeVersion;

/// Resolves a config (defaults, preset expansion, validation). Unknown keys
/// are rejected with ConfigError.
RunManifest resolveManifest(const KeyValueConfig& config);
KeyValueConfig manifestToConfig(const RunManifest& manifest);

std::string formatDouble(double v);  // %.17g

}  // namespace tcl
