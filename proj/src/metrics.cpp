#include "tcl/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "tcl/config.hpp"
#include "tcl/error.hpp"

namespace tcl {

std::string formatMetricsRecord(const EpochMetrics& m) {
    return "epoch=" + std::to_string(m.epoch) + " train_loss=" + formatDouble(m.trainLoss) +
           " train_top1=" + formatDouble(m.trainTop1) + " test_top1=" + formatDouble(m.testTop1) +
           " wall_seconds=" + formatDouble(m.wallSeconds);
}

EpochMetrics parseMetricsRecord(const std::string& line) {
    std::istringstream is(line);
    const char* fields[] = {"epoch", "train_loss", "train_top1", "test_top1", "wall_seconds"};
    EpochMetrics m;
    std::string tok;
    for (const char* f : fields) {
        if (!(is >> tok)) throw FormatError("metrics record is missing field " + std::string(f));
        const auto eq = tok.find('=');
        if (eq == std::string::npos || tok.substr(0, eq) != f)
            throw FormatError("metrics record field '" + tok + "', expected " + f);
        const std::string value = tok.substr(eq + 1);
        try {
            std::size_t used = 0;
            if (std::string(f) == "epoch") {
                m.epoch = std::stoul(value, &used);
            } else {
                const double v = std::stod(value, &used);
                if (std::string(f) == "train_loss") m.trainLoss = v;
                else if (std::string(f) == "train_top1") m.trainTop1 = v;
                else if (std::string(f) == "test_top1") m.testTop1 = v;
                else m.wallSeconds = v;
            }
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::logic_error&) {
            throw FormatError("bad value in metrics field '" + tok + "'");
        }
    }
    if (is >> tok) throw FormatError("trailing content in metrics record: " + tok);
    return m;
}

void writeMetrics(const EpochMetrics& m, std::ostream& sink) {
    sink << formatMetricsRecord(m) << '\n';
    sink.flush();
    if (!sink) throw IoError("failed writing metrics record for epoch " + std::to_string(m.epoch));
}

void writeMetrics(const TrainMetrics& metrics, std::ostream& sink) {
    for (const auto& m : metrics.epochs) writeMetrics(m, sink);
}

std::vector<EpochMetrics> readMetrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<EpochMetrics> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(parseMetricsRecord(line));
    }
    return out;
}

MetricsFile::MetricsFile(const std::string& path) : path_(path), out_(path, std::ios::app) {
    if (!out_) throw IoError("cannot open metrics file " + path);
}

void MetricsFile::append(const EpochMetrics& m) {
    try {
        writeMetrics(m, out_);
    } catch (const IoError& e) {
        throw IoError(std::string(e.what()) + "; " + path_ + " keeps the " + std::to_string(written_) +
                      " completed epoch record(s) written before the failure");
    }
    ++written_;
}

}  // namespace tcl
