#pragma once

#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "tcl/network.hpp"

namespace tcl {

/// `epoch=E train_loss=L train_top1=A test_top1=T wall_seconds=S`, numbers
/// with 17 significant digits.
std::string formatMetricsRecord(const EpochMetrics& m);
EpochMetrics parseMetricsRecord(const std::string& line);

void writeMetrics(const EpochMetrics& m, std::ostream& sink);
void writeMetrics(const TrainMetrics& metrics, std::ostream& sink);

std::vector<EpochMetrics> readMetrics(const std::string& path);

/// Append-only metrics file flushed after every record.
class MetricsFile {
public:
    explicit MetricsFile(const std::string& path);
    void append(const EpochMetrics& m);
    std::size_t written() const { return written_; }

private:
    std::string path_;
    std::ofstream out_;
    std::size_t written_ = 0;
};

}  // namespace tcl
