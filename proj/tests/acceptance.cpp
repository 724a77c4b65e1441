// One PASS/FAIL line per acceptance criterion. Exit status is non-zero if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "automapper/cli.hpp"
#include "automapper/costmodel.hpp"
#include "automapper/errors.hpp"
#include "automapper/mapspace.hpp"
#include "automapper/oracle.hpp"
#include "automapper/search.hpp"
#include "test_support.hpp"

using namespace automapper;
using namespace automapper::testing;
using nlohmann::json;

namespace {

// Pinned tolerances.
constexpr int kOracleMappingsPerLayer = 100;
constexpr std::uint64_t kOracleIterationCap = 1'000'000;
constexpr double kOptimalityGap = 0.05;
constexpr int kOptimalitySeeds = 20;
constexpr int kOptimalityMinHits = 18;  // 90% of 20
constexpr double kSpaceSizeMinLog10 = 27.0;
constexpr double kBitScaleRatio = 2.0;     // exact
constexpr double kMacRatio = 1.0;          // exact
constexpr int kBitScaleMappings = 20;
constexpr int kMacMappings = 100;
constexpr int kPipelineTrials = 20;

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    const std::vector<ConvLayerShape> layers = {
        layer(4, 4, 4, 4, 3, 3, 1, "a"), layer(2, 4, 3, 3, 2, 2, 1, "b"), layer(4, 2, 4, 2, 1, 3, 2, "c"),
        layer(3, 3, 2, 4, 3, 1, 1, "d"), layer(4, 4, 2, 2, 2, 2, 2, "e")};
    HwParams p;
    p.rows = 4;
    p.cols = 4;
    p.rf_bits = 512;
    p.gb_bits = 1 << 16;
    const HardwareSpec hw = make_hw(p);
    Rng rng(2024);
    int compared = 0;
    for (const auto& l : layers) {
        for (int i = 0; i < kOracleMappingsPerLayer; ++i) {
            const LayerMapping m = random_mapping(l, hw, 16, rng);
            if (!(oracle_simulate(m, l, kOracleIterationCap) == access_counts(m, l))) {
                return {false, "mismatch on layer " + l.name + ": " + canonical_string(m)};
            }
            ++compared;
        }
    }
    return {true, std::to_string(compared) + " mappings over 5 layers, all equal"};
}

Outcome small_scale_optimality() {
    const Network net = network({layer(4, 4, 2, 2, 1, 1, 1, "tiny")});
    const HardwareSpec hw = load_hardware(data_dir() / "small_hw.json");
    DesignSpace space;
    space.orders = {kCanonicalOrder};
    const BigInt size = network_space_size(net, space);
    if (size > 100000) return {false, "space too large: " + size.str()};

    const SearchResult ex = exhaustive_search(net, hw, 16, size, Objective::EDP, space);
    const double optimum = ex.best_cost.total.edp;

    SearchConfig cfg = default_search_config(feature_count(1));
    cfg.budget = static_cast<std::uint64_t>(size / 10);
    cfg.space = space;
    int hits = 0;
    bool beaten = false;
    double worst = 0.0;
    for (int seed = 0; seed < kOptimalitySeeds; ++seed) {
        cfg.seed = static_cast<std::uint64_t>(seed);
        const double found = evolutionary_search(net, hw, 16, cfg).best_cost.total.edp;
        if (found < optimum) beaten = true;
        const double gap = found / optimum - 1.0;
        worst = std::max(worst, gap);
        if (gap <= kOptimalityGap) ++hits;
    }
    std::ostringstream d;
    d << "space " << size.str() << ", " << ex.evaluations_used << " valid, budget " << cfg.budget << ", "
      << hits << "/" << kOptimalitySeeds << " within 5%, worst gap " << worst * 100 << "%"
      << (beaten ? ", BEAT OPTIMUM" : "");
    return {hits >= kOptimalityMinHits && !beaten, d.str()};
}

Outcome alexnet_space_size() {
    std::ostringstream out, err;
    const int status = run_cli({"space-size", "--workload", (data_dir() / "alexnet_conv.json").string()}, out, err);
    if (status != kExitOk) return {false, "space-size exited " + std::to_string(status)};
    std::istringstream lines(out.str());
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string label;
        double log10 = 0.0;
        if (fields >> label >> log10 && label == "total") {
            std::ostringstream d;
            d << "log10 = " << log10;
            return {log10 >= kSpaceSizeMinLog10, d.str()};
        }
    }
    return {false, "no total line"};
}

Outcome default_hyperparameters() {
    for (std::size_t layers = 1; layers <= 10; ++layers) {
        const std::size_t F = feature_count(layers);
        const SearchConfig cfg = default_search_config(F);
        const std::size_t k = (3 * F + 9) / 10;  // ceil(0.3 F) in integers
        if (cfg.n != 1000 || cfg.m != 300 || cfg.k != k) {
            return {false, "F=" + std::to_string(F) + " gives n=" + std::to_string(cfg.n) +
                               " m=" + std::to_string(cfg.m) + " k=" + std::to_string(cfg.k)};
        }
    }
    const SearchConfig alex = default_search_config(feature_count(5));
    return {true, "n=1000 m=300, k=" + std::to_string(alex.k) + " for F=51"};
}

std::uint64_t binomial(int n, int k) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

Outcome factorization_counts() {
    int checked = 0;
    for (std::int64_t p : {2, 3}) {
        std::int64_t n = 1;
        for (int e = 0; e <= 6; ++e, n *= p) {
            for (int parts = 1; parts <= 4; ++parts) {
                const std::uint64_t expected = binomial(e + parts - 1, parts - 1);
                const std::size_t got = enumerate_factorizations(n, parts).size();
                if (got != expected) {
                    return {false, std::to_string(n) + " into " + std::to_string(parts) + ": " +
                                       std::to_string(got) + " != " + std::to_string(expected)};
                }
                ++checked;
            }
        }
    }
    return {true, std::to_string(checked) + " cases exact"};
}

Outcome bitwidth_scaling() {
    const HardwareSpec hw = default_hardware();
    const ConvLayerShape l = layer(16, 8, 6, 6, 3, 3, 1, "scale");
    Rng rng(8);
    for (int i = 0; i < kBitScaleMappings; ++i) {
        const LayerMapping m = random_mapping(l, hw, 16, rng);
        const CostReport r16 = evaluate(m, l, hw, 16);
        const CostReport r8 = evaluate(m, l, hw, 8);
        if (r16.energy(Component::MAC) != kMacRatio * r8.energy(Component::MAC)) {
            return {false, "MAC energy changed with bit-width"};
        }
        for (Component c : {Component::RF, Component::NoC, Component::GB, Component::DRAM}) {
            if (r8.energy(c) == 0.0 || r16.energy(c) / r8.energy(c) != kBitScaleRatio) {
                return {false, std::string(to_string(c)) + " ratio " + std::to_string(r16.energy(c) / r8.energy(c))};
            }
        }
    }

    Network net = load_workload(data_dir() / "tiny.json");
    const HardwareSpec small = load_hardware(data_dir() / "small_hw.json");
    SearchConfig cfg = scaled_search_config(200, feature_count(net.layers.size()));
    cfg.budget = 4000;
    cfg.seed = 1;
    const auto outcomes = search_per_bitwidth(net, small, cfg);
    std::ostringstream d;
    d << kBitScaleMappings << " mappings ratio 2.0/1.0; searched EDP";
    double previous = 0.0;
    bool monotone = true;
    for (const auto& [bits, o] : outcomes) {  // ascending bit-width
        if (!o.ok()) return {false, "search failed at " + std::to_string(bits) + " bits: " + o.error};
        const double edp = o.result->best_cost.total.edp;
        d << " " << bits << "b=" << edp;
        if (edp < previous) monotone = false;
        previous = edp;
    }
    return {monotone, d.str()};
}

Outcome mac_conservation() {
    const Network alexnet = load_workload(data_dir() / "alexnet_conv.json");
    const ConvLayerShape& l = alexnet.layers[2];
    const HardwareSpec hw = default_hardware();
    const auto expected = static_cast<std::uint64_t>(l.K * l.C * l.X * l.Y * l.R * l.S);
    Rng rng(77);
    for (int i = 0; i < kMacMappings; ++i) {
        const LayerMapping m = random_mapping(l, hw, 16, rng);
        const std::uint64_t macs = evaluate(m, l, hw, 16).access_counts.macs;
        if (macs != expected) return {false, "mapping reports " + std::to_string(macs)};
    }
    return {true, std::to_string(kMacMappings) + " mappings of " + l.name + " report " + std::to_string(expected)};
}

std::string shell_quote(const std::string& s) { return "'" + s + "'"; }

Outcome cli_determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "automapper_acceptance";
    std::filesystem::create_directories(dir);
    std::vector<json> sections;
    for (const char* jobs : {"1", "8"}) {
        const auto out = dir / (std::string("search_jobs") + jobs + ".json");
        const std::string cmd = shell_quote(AUTOMAPPER_CLI_PATH) + " search --workload " +
                                shell_quote((data_dir() / "tiny.json").string()) + " --hw " +
                                shell_quote((data_dir() / "small_hw.json").string()) +
                                " --population 100 --budget 1000 --seed 5 --jobs " + jobs + " --out " +
                                shell_quote(out.string()) + " > /dev/null";
        const int rc = std::system(cmd.c_str());
        if (rc != 0) return {false, std::string("search --jobs ") + jobs + " failed"};
        std::ifstream f(out);
        sections.push_back(deterministic_section(json::parse(f)));
    }
    const std::string a = sections[0].dump();
    const std::string b = sections[1].dump();
    return {a == b, "deterministic sections " + std::string(a == b ? "identical" : "differ") + " (" +
                        std::to_string(a.size()) + " bytes)"};
}

Outcome pipeline_bypass() {
    const Network net = network({layer(8, 4, 4, 4, 3, 3, 1, "first"), layer(4, 8, 4, 4, 1, 1, 1, "second")});
    HwParams p;
    p.rows = 8;
    p.cols = 8;
    p.rf_bits = 1024;
    p.gb_bits = 1 << 16;
    const HardwareSpec hw = make_hw(p);
    const int bits = 16;
    DesignSpace on;
    on.pipeline = PipelineChoice::On;
    Rng rng(99);
    int infeasible_raised = 0;
    for (int trial = 0; trial < kPipelineTrials; ++trial) {
        NetworkMapping nm = random_network_mapping(net, hw, bits, rng, on);
        const NetworkCost pipe = evaluate_network(nm, net, hw, bits);
        nm.pipeline = false;
        const NetworkCost multi = evaluate_network(nm, net, hw, bits);

        const AccessCounts first = access_counts(nm.per_layer[0], net.layers[0]);
        const AccessCounts second = access_counts(nm.per_layer[1], net.layers[1]);
        const double words = static_cast<double>(first.dram_gb[index(TensorKind::Outputs)].total() +
                                                 second.dram_gb[index(TensorKind::Inputs)].total());
        const double bypass = words * hw.level(Level::DRAM).energy_per_word * bits / hw.ref_bits;
        if (pipe.total.total_energy != multi.total.total_energy - bypass) {
            std::ostringstream d;
            d.precision(17);
            d << "trial " << trial << ": pipeline " << pipe.total.total_energy << " vs " << multi.total.total_energy
              << " - " << bypass;
            return {false, d.str()};
        }

        std::int64_t summed = 0;
        for (std::size_t i = 0; i < net.layers.size(); ++i)
            summed += level_footprint_bits(nm.per_layer[i], Level::GB, net.layers[i], bits);
        HwParams tight = p;
        tight.gb_bits = summed - 1;
        nm.pipeline = true;
        try {
            evaluate_network(nm, net, make_hw(tight), bits);
        } catch (const PipelineInfeasible&) {
            ++infeasible_raised;
        }
    }
    return {infeasible_raised == kPipelineTrials,
            std::to_string(kPipelineTrials) + " mappings exact; PipelineInfeasible raised " +
                std::to_string(infeasible_raised) + "/" + std::to_string(kPipelineTrials)};
}

}  // namespace

int main() {
    report(1, "oracle equivalence", oracle_equivalence);
    report(2, "small-scale optimality", small_scale_optimality);
    report(3, "AlexNet space size", alexnet_space_size);
    report(4, "default hyperparameters", default_hyperparameters);
    report(5, "factorization counting", factorization_counts);
    report(6, "bit-width scaling", bitwidth_scaling);
    report(7, "MAC conservation", mac_conservation);
    report(8, "determinism across --jobs", cli_determinism);
    report(9, "pipeline bypass", pipeline_bypass);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
