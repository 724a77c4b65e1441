#include <catch2/catch_amalgamated.hpp>

#include "automapper/costmodel.hpp"
#include "automapper/errors.hpp"
#include "automapper/mapspace.hpp"
#include "test_support.hpp"

using namespace automapper;
using namespace automapper::testing;

namespace {

constexpr auto W = TensorKind::Weights;
constexpr auto I = TensorKind::Inputs;
constexpr auto O = TensorKind::Outputs;

const Traffic& at(const TensorTraffic& t, TensorKind k) { return t[index(k)]; }

LayerMapping at_dram(const ConvLayerShape& l, LoopOrder order) {
    LayerMapping m = minimal_tile_mapping(l);
    m.at(Level::DRAM).order = order;
    return m;
}

HardwareSpec unbounded_hw(std::int64_t rows = 4, std::int64_t cols = 4) {
    HwParams p;
    p.rows = rows;
    p.cols = cols;
    p.rf_bits = 1 << 20;
    p.gb_bits = 1LL << 40;
    return make_hw(p);
}

}  // namespace

TEST_CASE("loop order decides which operand is re-fetched", "[costmodel][counts]") {
    const ConvLayerShape l = layer(2, 2, 1, 1, 1, 1);

    SECTION("K outer, C inner") {
        const AccessCounts a = access_counts(at_dram(l, order_starting({LoopDim::K, LoopDim::C})), l);
        CHECK(at(a.dram_gb, W).reads == 4);
        CHECK(at(a.dram_gb, I).reads == 4);
        CHECK(at(a.dram_gb, O).writes == 2);
        CHECK(at(a.dram_gb, O).reads == 0);
    }
    SECTION("C outer, K inner") {
        const AccessCounts a = access_counts(at_dram(l, order_starting({LoopDim::C, LoopDim::K})), l);
        CHECK(at(a.dram_gb, W).reads == 4);
        CHECK(at(a.dram_gb, I).reads == 2);
        CHECK(at(a.dram_gb, O).writes == 4);
        CHECK(at(a.dram_gb, O).reads == 2);
    }
}

TEST_CASE("unit loops never add traffic", "[costmodel][counts]") {
    const ConvLayerShape l = layer(2, 2, 1, 1, 1, 1);
    // X, Y, R, S all have bound 1; where they sit in the order is irrelevant.
    const AccessCounts a = access_counts(at_dram(l, order_starting({LoopDim::K, LoopDim::C})), l);
    const AccessCounts b =
        access_counts(at_dram(l, {LoopDim::X, LoopDim::K, LoopDim::R, LoopDim::C, LoopDim::S, LoopDim::Y}), l);
    CHECK(a == b);
}

TEST_CASE("footprints", "[costmodel][footprint]") {
    SECTION("minimal tile holds one word per operand") {
        const ConvLayerShape l = layer(3, 5, 7, 2, 3, 3);
        const LayerMapping m = minimal_tile_mapping(l);
        for (int bits : {4, 8, 16, 32}) {
            CHECK(level_footprint_bits(m, Level::RF, l, bits) == 3 * bits);
            CHECK(level_footprint_bits(m, Level::GB, l, bits) == 3 * bits);
        }
    }
    SECTION("input halo pairs X with S") {
        const ConvLayerShape l = layer(1, 1, 2, 1, 1, 3);
        LayerMapping m;
        m.at(Level::RF).size(LoopDim::X) = 2;
        m.at(Level::RF).size(LoopDim::S) = 3;
        CHECK(footprint_words(m, Level::RF, I, l) == 4);
        CHECK(footprint_words(m, Level::RF, W, l) == 3);
        CHECK(footprint_words(m, Level::RF, O, l) == 2);
    }
    SECTION("stride widens the halo") {
        const ConvLayerShape l = layer(1, 1, 1, 3, 2, 1, 2);
        LayerMapping m;
        m.at(Level::RF).size(LoopDim::Y) = 3;
        m.at(Level::RF).size(LoopDim::R) = 2;
        CHECK(footprint_words(m, Level::RF, I, l) == (3 - 1) * 2 + 2);
    }
    SECTION("GB tile spans the RF, spatial and GB factors") {
        const ConvLayerShape l = layer(8, 4, 1, 1, 1, 1);
        LayerMapping m;
        m.at(Level::RF).size(LoopDim::K) = 2;
        m.spatial = SpatialMapping{LoopDim::K, LoopDim::C, 2, 4};
        m.at(Level::GB).size(LoopDim::K) = 2;
        CHECK(footprint_words(m, Level::GB, W, l) == 32);
        CHECK(footprint_words(m, Level::GB, O, l) == 8);
        CHECK(footprint_words(m, Level::GB, I, l) == 4);
        CHECK(footprint_words(m, Level::RF, W, l) == 2);
        CHECK(footprint_bits(m, Level::GB, W, l, 8) == 256);
    }
}

TEST_CASE("energy and delay of a hand-worked mapping", "[costmodel][energy]") {
    const ConvLayerShape l = layer(2, 2, 1, 1, 1, 1);
    const LayerMapping m = at_dram(l, order_starting({LoopDim::K, LoopDim::C}));
    const CostReport r = evaluate(m, l, unbounded_hw(), 16);
    // 10 words cross each boundary once per fetch.
    CHECK(r.energy(Component::MAC) == 4.0);
    CHECK(r.energy(Component::RF) == 16.0);
    CHECK(r.energy(Component::NoC) == 20.0);
    CHECK(r.energy(Component::GB) == 60.0);
    CHECK(r.energy(Component::DRAM) == 2000.0);
    CHECK(r.total_energy == 2100.0);
    CHECK(r.cycles == 4);
    CHECK(r.edp == 8400.0);
    CHECK(r.data_movement_energy() == 2096.0);
}

TEST_CASE("bandwidth bounds the cycle count", "[costmodel][cycles]") {
    const ConvLayerShape l = layer(2, 2, 1, 1, 1, 1);
    const LayerMapping m = at_dram(l, order_starting({LoopDim::K, LoopDim::C}));
    HwParams p;
    p.gb_bw = 16;   // 10 words * 16 bits -> 10 cycles
    CHECK(evaluate(m, l, make_hw(p), 16).cycles == 10);
    p.dram_bw = 8;  // 10 words * 16 bits -> 20 cycles
    CHECK(evaluate(m, l, make_hw(p), 16).cycles == 20);
    p.dram_bw = 1 << 20;
    CHECK(evaluate(m, l, make_hw(p), 16).cycles == 10);
}

TEST_CASE("compute-bound cycles divide MACs over active PEs", "[costmodel][cycles]") {
    SECTION("single PE") {
        const ConvLayerShape l = layer(3, 4, 2, 5, 1, 1);
        CHECK(evaluate(minimal_tile_mapping(l), l, unbounded_hw(1, 1), 16).cycles == 120);
    }
    SECTION("30 x 30 array") {
        const ConvLayerShape l = layer(30, 30, 3, 7, 1, 1);
        LayerMapping m = minimal_tile_mapping(l);
        m.at(Level::DRAM).size(LoopDim::K) = 1;
        m.at(Level::DRAM).size(LoopDim::C) = 1;
        m.spatial = SpatialMapping{LoopDim::K, LoopDim::C, 30, 30};
        const std::uint64_t macs = 30 * 30 * 3 * 7;
        CHECK(evaluate(m, l, unbounded_hw(30, 30), 16).cycles == (macs + 899) / 900);
    }
}

TEST_CASE("halving the bit-width halves data-movement energy", "[costmodel][energy][property]") {
    Rng rng(17);
    const HardwareSpec hw = make_hw();
    for (int trial = 0; trial < 50; ++trial) {
        const ConvLayerShape l = random_small_layer(rng, 8);
        const LayerMapping m = random_mapping(l, hw, 16, rng);
        const CostReport r16 = evaluate(m, l, hw, 16);
        const CostReport r8 = evaluate(m, l, hw, 8);
        CHECK(r16.access_counts == r8.access_counts);
        CHECK(r16.energy(Component::MAC) == r8.energy(Component::MAC));
        CHECK(r16.data_movement_energy() == Catch::Approx(2.0 * r8.data_movement_energy()).epsilon(1e-12));
    }
}

TEST_CASE("every mapping performs exactly the layer's MACs", "[costmodel][property]") {
    Rng rng(23);
    const HardwareSpec hw = make_hw();
    for (int trial = 0; trial < 100; ++trial) {
        const ConvLayerShape l = random_small_layer(rng, 10);
        const LayerMapping m = random_mapping(l, hw, 16, rng);
        const AccessCounts a = access_counts(m, l);
        CHECK(a.macs == static_cast<std::uint64_t>(total_macs(l)));
        CHECK(a.rf_operand_accesses == 4 * a.macs);
        for (TensorKind t : kAllTensors) {
            // Each boundary moves at least the full tensor once.
            CHECK(at(a.dram_gb, t).total() >= 1);
            CHECK(at(a.rf_side, t).total() >= at(a.gb_side, t).total());
        }
        CHECK(at(a.dram_gb, O).writes >= static_cast<std::uint64_t>(l.K * l.X * l.Y));
        CHECK(at(a.dram_gb, W).reads >= static_cast<std::uint64_t>(l.K * l.C * l.R * l.S));
    }
}

TEST_CASE("evaluate rejects invalid mappings", "[costmodel][errors]") {
    const ConvLayerShape l = layer(2, 2, 1, 1, 1, 1);
    LayerMapping m = minimal_tile_mapping(l);
    m.at(Level::DRAM).size(LoopDim::K) = 1;
    CHECK_THROWS_AS(evaluate(m, l, make_hw(), 16), InvalidMapping);
}

TEST_CASE("pipelining keeps intermediate activations on chip", "[costmodel][pipeline]") {
    const Network net = network({layer(4, 2, 2, 2, 1, 1, 1, "a"), layer(2, 4, 2, 2, 1, 1, 1, "b")});
    HwParams p;
    p.rows = 4;
    const HardwareSpec hw = make_hw(p);

    NetworkMapping nm;
    for (const auto& l : net.layers) nm.per_layer.push_back(minimal_tile_mapping(l));
    const NetworkCost multi = evaluate_network(nm, net, hw, 16);
    nm.pipeline = true;
    const NetworkCost pipe = evaluate_network(nm, net, hw, 16);

    const AccessCounts a0 = access_counts(nm.per_layer[0], net.layers[0]);
    const AccessCounts a1 = access_counts(nm.per_layer[1], net.layers[1]);
    const double bypassed = static_cast<double>(at(a0.dram_gb, O).total() + at(a1.dram_gb, I).total());

    CHECK(multi.total.energy(Component::DRAM) - pipe.total.energy(Component::DRAM) == bypassed * 200.0);
    for (Component c : {Component::MAC, Component::RF, Component::NoC, Component::GB})
        CHECK(multi.total.energy(c) == pipe.total.energy(c));
    CHECK(multi.total.cycles == multi.layers[0].cycles + multi.layers[1].cycles);
    CHECK(pipe.total.cycles == std::max(pipe.layers[0].cycles, pipe.layers[1].cycles));
}

TEST_CASE("pipelining fails when the GB cannot hold every layer", "[costmodel][pipeline]") {
    const Network net = network({layer(2, 2, 1, 1, 1, 1, 1, "a"), layer(2, 2, 1, 1, 1, 1, 1, "b")});
    HwParams p;
    p.gb_bits = 80;  // each layer's 48 bits fit; both together do not
    const HardwareSpec hw = make_hw(p);
    NetworkMapping nm{{minimal_tile_mapping(net.layers[0]), minimal_tile_mapping(net.layers[1])}, false};
    CHECK_NOTHROW(evaluate_network(nm, net, hw, 16));
    nm.pipeline = true;
    CHECK_THROWS_AS(evaluate_network(nm, net, hw, 16), PipelineInfeasible);
    CHECK(pipeline_problem(nm, net, hw, 16).has_value());
}

TEST_CASE("pipelining needs a row per layer", "[costmodel][pipeline]") {
    const Network net = network({layer(1, 1, 1, 1, 1, 1), layer(1, 1, 1, 1, 1, 1), layer(1, 1, 1, 1, 1, 1)});
    HwParams p;
    p.rows = 2;
    NetworkMapping nm;
    for (const auto& l : net.layers) nm.per_layer.push_back(minimal_tile_mapping(l));
    nm.pipeline = true;
    CHECK_THROWS_AS(evaluate_network(nm, net, make_hw(p), 16), PipelineInfeasible);
}

TEST_CASE("cost JSON carries every component", "[costmodel]") {
    const ConvLayerShape l = layer(2, 2, 1, 1, 1, 1);
    const auto j = to_json(evaluate(minimal_tile_mapping(l), l, make_hw(), 16));
    for (Component c : kAllComponents) CHECK(j["energy_by_component"].contains(std::string(to_string(c))));
    CHECK(j.contains("cycles"));
    CHECK(j.contains("edp"));
}
