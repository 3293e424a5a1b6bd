#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "tcl/analysis.hpp"
#include "tcl/cli.hpp"
#include "tcl/config.hpp"
#include "tcl/data.hpp"
#include "tcl/error.hpp"
#include "tcl/metrics.hpp"

using namespace tcl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tcl_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct CliRun {
    int code;
    std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = runCli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("metrics records roundtrip exactly") {
    const EpochMetrics m{3, 1.0 / 3.0, 0.1 + 0.2, 2.0 / 7.0, 1e-300};
    CHECK(parseMetricsRecord(formatMetricsRecord(m)) == m);
    CHECK_THROWS_AS(parseMetricsRecord("epoch=1 train_loss=0.5"), FormatError);
    CHECK_THROWS_AS(parseMetricsRecord("epoch=x train_loss=1 train_top1=1 test_top1=1 wall_seconds=1"), FormatError);

    const fs::path dir = scratch("roundtrip");
    TrainMetrics all;
    for (std::size_t e = 1; e <= 3; ++e) all.epochs.push_back({e, 1.0 / double(e), 0.5, 0.25, 0.125});
    {
        std::ofstream out(dir / "m.txt");
        writeMetrics(all, out);
    }
    const auto back = readMetrics((dir / "m.txt").string());
    REQUIRE(back.size() == 3u);
    for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == all.epochs[i]);
}

TEST_CASE("killed run keeps completed epochs") {
    const fs::path dir = scratch("kill");
    const std::string path = (dir / "metrics.txt").string();
    const pid_t pid = fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        SynthSpec spec;
        spec.numSamples = 30;
        const Dataset d = synthDataset(spec);
        Network net = buildNetwork(preset("synth-sub1"), 0);
        TrainConfig c;
        c.epochs = 5;
        c.batchSize = 10;
        MetricsFile sink(path);
        train(net, c, d, nullptr, [&](const EpochMetrics& m) {
            sink.append(m);
            if (m.epoch == 2) ::kill(::getpid(), SIGKILL);
        });
        std::_Exit(0);
    }
    int status = 0;
    ::waitpid(pid, &status, 0);
    CHECK(WIFSIGNALED(status));
    const auto records = readMetrics(path);
    REQUIRE(records.size() == 2u);
    CHECK(records[0].epoch == 1u);
    CHECK(records[1].epoch == 2u);
}

TEST_CASE("cli exit codes") {
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"analyze", "--bogus"}).code == 1);
    const CliRun unknown = cli({"analyze", "--preset", "no-such-net"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("unknown preset") != std::string::npos);
    CHECK(unknown.err.find("Usage") != std::string::npos);
    CHECK(cli({"train", "--config", "/nonexistent.cfg"}).code == 2);
    CHECK(cli({"tables", "4"}).code == 1);
}

TEST_CASE("analyze prints the savings line") {
    const CliRun r = cli({"analyze", "--preset", "alexnet-cifar-sub1-256"});
    CHECK(r.code == 0);
    CHECK(r.out.find("percent=62.77%") != std::string::npos);
}

TEST_CASE("tables output is the analysis result") {
    const CliRun r = cli({"tables", "1"});
    CHECK(r.code == 0);
    CHECK(r.out == formatTable(reproduceTable(1)));
    const CliRun all = cli({"tables"});
    CHECK(all.out == formatTable(reproduceTable(1)) + formatTable(reproduceTable(2)) + formatTable(reproduceTable(3)));
}

TEST_CASE("gradcheck subcommand") {
    const CliRun r = cli({"gradcheck", "--seed", "7"});
    CHECK(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        const auto p = line.find("worst_rel_err=");
        REQUIRE(p != std::string::npos);
        CHECK(std::stod(line.substr(p + 14)) < 1e-5);
        ++n;
    }
    CHECK(n == 7);
}

TEST_CASE("train writes manifest, metrics and report; the manifest reruns bit-identically") {
    const fs::path a = scratch("train_a"), b = scratch("train_b");
    std::ofstream(a / "in.cfg") << "network.preset = synth-sub1\ntrain.epochs = 3\ntrain.batch_size = 16\n"
                                   "data.train_samples = 48\ndata.test_samples = 12\noutput.wall_clock = false\n";
    const CliRun r = cli({"train", "--config", (a / "in.cfg").string(), "--out", (a / "run").string()});
    REQUIRE(r.code == 0);
    const auto recs = readMetrics((a / "run" / "metrics.txt").string());
    REQUIRE(recs.size() == 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(recs[i].epoch == i + 1);
        CHECK(recs[i].wallSeconds == 0.0);
    }
    CHECK(slurp(a / "run" / "report.txt").find("savings baseline=synth-baseline") != std::string::npos);

    // Rerun the written manifest elsewhere.
    const CliRun again = cli({"train", "--config", (a / "run" / "manifest.txt").string(), "--out", (b / "run").string()});
    REQUIRE(again.code == 0);
    CHECK(slurp(a / "run" / "metrics.txt") == slurp(b / "run" / "metrics.txt"));
}

TEST_CASE("synth subcommand writes loadable idx files") {
    const fs::path dir = scratch("synth");
    REQUIRE(cli({"synth", "--out", dir.string(), "--seed", "3"}).code == 0);
    const Dataset d = loadIdx((dir / "train-images.idx").string(), (dir / "train-labels.idx").string());
    CHECK(d.images.shape() == Shape{200, 3, 8, 8});
    const Dataset t = loadIdx((dir / "test-images.idx").string(), (dir / "test-labels.idx").string());
    CHECK(t.size() == 60u);

    std::ofstream(dir / "idx.cfg") << "network.preset = synth-sub1\ntrain.epochs = 2\ntrain.batch_size = 32\n"
                                      "data.kind = idx\n"
                                   << "data.train_images = " << (dir / "train-images.idx").string() << "\n"
                                   << "data.train_labels = " << (dir / "train-labels.idx").string() << "\n"
                                   << "data.test_images = " << (dir / "test-images.idx").string() << "\n"
                                   << "data.test_labels = " << (dir / "test-labels.idx").string() << "\n";
    CHECK(cli({"train", "--config", (dir / "idx.cfg").string(), "--out", (dir / "run").string()}).code == 0);
    CHECK(readMetrics((dir / "run" / "metrics.txt").string()).size() == 2u);
}
