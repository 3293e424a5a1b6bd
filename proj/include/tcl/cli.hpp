#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tcl/config.hpp"

namespace tcl {

struct RunResult {
    TrainMetrics metrics;
    std::string manifestPath;
    std::string metricsPath;
    std::string reportPath;
};

/// Loads the data, builds the network and trains it, writing
/// manifest.txt, metrics.txt (one flushed record per epoch) and
/// report.txt (cost report) under manifest.outDir.
RunResult executeRun(const RunManifest& manifest, std::ostream& log);

/// Entry point of the `tclnet` tool; args exclude the program name.
/// Returns 0 on success, 1 on validation errors, 2 on runtime errors.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tcl
