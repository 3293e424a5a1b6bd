#include "tcl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

#include "tcl/error.hpp"
#include "tcl/layers/layer.hpp"

namespace tcl {

namespace {

std::vector<std::uint8_t> readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on " + path);
    return bytes;
}

void putBigEndian(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void writeFile(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure on " + path);
}

}  // namespace

IdxArray parseIdx(const std::vector<std::uint8_t>& bytes, const std::string& what) {
    if (bytes.empty()) throw IoError(what + ": empty file");
    if (bytes.size() < 4) throw IoError(what + ": truncated header");
    if (bytes[0] != 0 || bytes[1] != 0) throw FormatError(what + ": bad IDX magic");
    if (bytes[2] != 0x08) throw FormatError(what + ": unsupported IDX element type " + std::to_string(bytes[2]));
    const std::size_t ndims = bytes[3];
    if (ndims == 0) throw FormatError(what + ": IDX file declares no dimensions");
    const std::size_t header = 4 + 4 * ndims;
    if (bytes.size() < header) throw IoError(what + ": truncated header");

    IdxArray a;
    std::size_t count = 1;
    for (std::size_t i = 0; i < ndims; ++i) {
        const std::size_t p = 4 + 4 * i;
        const std::size_t d = (std::size_t{bytes[p]} << 24) | (std::size_t{bytes[p + 1]} << 16) |
                              (std::size_t{bytes[p + 2]} << 8) | std::size_t{bytes[p + 3]};
        if (d == 0) throw FormatError(what + ": zero-sized dimension " + std::to_string(i));
        // Anything larger than the payload cannot be satisfied.
        if (count > (bytes.size() - header) / d) throw IoError(what + ": truncated data");
        count *= d;
        a.dims.push_back(d);
    }
    if (bytes.size() - header < count) throw IoError(what + ": truncated data");
    if (bytes.size() - header > count) throw FormatError(what + ": trailing bytes after IDX payload");
    a.values.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
    return a;
}

Dataset loadIdx(const std::string& imagesPath, const std::string& labelsPath, const std::string& split) {
    const IdxArray img = parseIdx(readFile(imagesPath), imagesPath);
    const IdxArray lab = parseIdx(readFile(labelsPath), labelsPath);
    if (img.dims.size() != 3 && img.dims.size() != 4)
        throw FormatError(imagesPath + ": image file must have 3 or 4 dimensions");
    if (lab.dims.size() != 1) throw FormatError(labelsPath + ": label file must have 1 dimension");
    if (img.dims[0] != lab.dims[0])
        throw ConsistencyError(std::to_string(img.dims[0]) + " images but " + std::to_string(lab.dims[0]) + " labels");

    Shape shape = img.dims.size() == 3 ? Shape{img.dims[0], 1, img.dims[1], img.dims[2]} : Shape(img.dims);
    std::vector<double> pixels(img.values.size());
    std::transform(img.values.begin(), img.values.end(), pixels.begin(),
                   [](std::uint8_t b) { return static_cast<double>(b) / 255.0; });

    Dataset d;
    d.images = Tensor(std::move(shape), std::move(pixels));
    d.labels.assign(lab.values.begin(), lab.values.end());
    d.numClasses = static_cast<std::size_t>(*std::max_element(d.labels.begin(), d.labels.end())) + 1;
    d.split = split;
    d.stats = computeChannelStats(d.images);
    return d;
}

void writeIdxImages(const std::string& path, const Tensor& images) {
    if (images.order() != 4) throw ShapeError("IDX image writer expects (N,C,H,W)");
    std::vector<std::uint8_t> bytes{0, 0, 0x08};
    const bool gray = images.dim(1) == 1;
    bytes.push_back(gray ? 3 : 4);
    for (std::size_t k = 0; k < 4; ++k) {
        if (gray && k == 1) continue;
        putBigEndian(bytes, static_cast<std::uint32_t>(images.dim(k)));
    }
    for (double v : images.data())
        bytes.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    writeFile(path, bytes);
}

void writeIdxLabels(const std::string& path, const std::vector<int>& labels) {
    std::vector<std::uint8_t> bytes{0, 0, 0x08, 1};
    putBigEndian(bytes, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) {
        if (l < 0 || l > 255) throw LabelError("label " + std::to_string(l) + " does not fit an IDX byte");
        bytes.push_back(static_cast<std::uint8_t>(l));
    }
    writeFile(path, bytes);
}

std::vector<Tensor> synthTemplates(const SynthSpec& spec) {
    Rng rng(spec.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Tensor> templates;
    for (std::size_t k = 0; k < spec.numClasses; ++k) {
        Tensor t(spec.shape);
        for (auto& v : t.data()) v = u(rng);
        templates.push_back(std::move(t));
    }
    return templates;
}

Dataset synthDataset(const SynthSpec& spec, const std::string& split) {
    if (spec.numClasses == 0 || spec.numSamples == 0 || spec.shape.empty())
        throw ConfigError("synthetic dataset needs positive sizes");
    const auto templates = synthTemplates(spec);
    // Independent noise stream per split.
    std::uint64_t salt = 0xcbf29ce484222325ULL;  // FNV-1a of the split tag
    for (unsigned char ch : split) salt = (salt ^ ch) * 0x100000001b3ULL;
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
    Rng rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);

    Shape shape{spec.numSamples};
    shape.insert(shape.end(), spec.shape.begin(), spec.shape.end());
    Dataset d;
    d.images = Tensor(shape);
    const std::size_t stride = shapeSize(spec.shape);
    for (std::size_t i = 0; i < spec.numSamples; ++i) {
        const int label = static_cast<int>(i % spec.numClasses);
        d.labels.push_back(label);
        const Tensor& t = templates[static_cast<std::size_t>(label)];
        for (std::size_t j = 0; j < stride; ++j) {
            const double v = t[j] + spec.noise * noise(rng);
            d.images[i * stride + j] = std::clamp(v, 0.0, 1.0);
        }
    }
    d.numClasses = spec.numClasses;
    d.split = split;
    if (d.images.order() >= 2) d.stats = computeChannelStats(d.images);
    return d;
}

}  // namespace tcl
