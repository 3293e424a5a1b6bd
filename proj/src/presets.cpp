#include <map>

#include "tcl/error.hpp"
#include "tcl/network.hpp"

namespace tcl {

namespace {

struct Family {
    std::string name;
    Shape input;
    std::string convStack;
    Shape head;  // activation entering the fully-connected block
    std::size_t classes;
};

// Conv stacks for 32x32 inputs ending in the (C,3,3) activations of the
// CIFAR experiments; the ImageNet families are head-only.
const std::vector<Family>& families() {
    static const std::vector<Family> f{
        {"alexnet-cifar", {3, 32, 32},
         "conv(64,3,1,1) relu maxpool(2) conv(192,3,1,1) relu maxpool(2) conv(384,3,1,1) relu "
         "conv(256,3,1,1) relu maxpool(2) conv(256,2,1,0) relu",
         {256, 3, 3}, 100},
        {"vgg-cifar", {3, 32, 32},
         "conv(64,3,1,1) relu conv(64,3,1,1) relu maxpool(2) conv(128,3,1,1) relu conv(128,3,1,1) relu maxpool(2) "
         "conv(256,3,1,1) relu conv(256,3,1,1) relu maxpool(2) conv(512,3,1,1) relu conv(512,2,1,0) relu",
         {512, 3, 3}, 100},
        {"alexnet-imagenet-s5", {256, 5, 5}, "", {256, 5, 5}, 1000},
        {"alexnet-imagenet-s6", {256, 6, 6}, "", {256, 6, 6}, 1000},
        {"synth", {3, 8, 8}, "conv(16,3,1,1) relu maxpool(2)", {16, 4, 4}, 3},
    };
    return f;
}

std::string tcl(const Shape& r) {
    std::string s = "tcl(";
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + std::to_string(r[i]);
    return s + ")";
}

std::string fc(std::size_t h) { return "fc(" + std::to_string(h) + ") relu"; }

struct Head {
    std::string suffix;
    Variant variant;
    std::string layers;
};

std::vector<Head> headsFor(const Family& f) {
    const std::string cls = "classifier(" + std::to_string(f.classes) + ")";
    const std::size_t s = f.head[1];
    auto ranks = [&](std::size_t c) { return Shape{c, s, s}; };
    auto added = [&](std::size_t c, std::size_t h, const Shape& r) {
        return Head{"added-" + std::to_string(c), Variant::AddedTcl, tcl(r) + " flatten " + fc(h) + " " + fc(h) + " " + cls};
    };
    auto sub1 = [&](std::size_t c, std::size_t h, const Shape& r) {
        return Head{"sub1-" + std::to_string(c), Variant::Substitute1, tcl(r) + " flatten " + fc(h) + " " + cls};
    };
    auto sub2 = [&](std::size_t c1, std::size_t c2) {
        return Head{"sub2-" + std::to_string(c1) + "-" + std::to_string(c2), Variant::Substitute2,
                    tcl(ranks(c1)) + " " + tcl(ranks(c2)) + " flatten " + cls};
    };
    std::vector<Head> heads;
    if (f.name == "synth") {
        heads.push_back({"baseline", Variant::Baseline, "flatten " + fc(256) + " " + cls});
        heads.push_back({"added", Variant::AddedTcl, tcl(f.head) + " flatten " + fc(256) + " " + cls});
        heads.push_back({"sub1", Variant::Substitute1, tcl(f.head) + " flatten " + cls});
        return heads;
    }
    heads.push_back({"baseline", Variant::Baseline, "flatten " + fc(4096) + " " + fc(4096) + " " + cls});
    const std::size_t c = f.head[0];
    if (f.name.starts_with("alexnet-imagenet")) {
        heads.push_back(added(c, 4096, f.head));
        heads.push_back(added(200, 3276, {200, 5, 5}));
        heads.push_back(sub1(c, 4096, f.head));
        return heads;
    }
    // Full size, 25% and 50% channel reduction with hidden units scaled alike.
    const std::size_t c75 = c * 3 / 4, c50 = c / 2;
    for (auto [ch, h] : {std::pair{c, std::size_t{4096}}, {c75, std::size_t{3072}}, {c50, std::size_t{2048}}})
        heads.push_back(added(ch, h, ranks(ch)));
    for (auto [ch, h] : {std::pair{c, std::size_t{4096}}, {c75, std::size_t{3072}}, {c50, std::size_t{2048}}})
        heads.push_back(sub1(ch, h, ranks(ch)));
    heads.push_back(sub2(c, c));
    heads.push_back(sub2(c75, c75 * 3 / 4));
    return heads;
}

const std::map<std::string, NetworkConfig>& registry() {
    static const std::map<std::string, NetworkConfig> r = [] {
        std::map<std::string, NetworkConfig> m;
        for (const Family& f : families()) {
            for (const Head& h : headsFor(f)) {
                NetworkConfig c;
                c.name = f.name + "-" + h.suffix;
                c.inputShape = f.input;
                c.variant = h.variant;
                c.layers = parseLayerList(f.convStack + " " + h.layers);
                c.baseline = f.name + "-baseline";
                m.emplace(c.name, std::move(c));
            }
        }
        return m;
    }();
    return r;
}

}  // namespace

std::vector<std::string> presetNames() {
    std::vector<std::string> names;
    for (const auto& [name, cfg] : registry()) names.push_back(name);
    return names;
}

NetworkConfig preset(std::string_view name) {
    const auto it = registry().find(std::string(name));
    if (it == registry().end()) throw ConfigError("unknown preset '" + std::string(name) + "'");
    return it->second;
}

}  // namespace tcl
