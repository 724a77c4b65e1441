#pragma once

// The mapping genome: per-level loop orders and loop sizes, a two-axis
// spatial (parallel-for) assignment and the network-wide pipeline flag.
//
// Loop nest, outermost first:
//   DRAM loops (6)  ->  GB loops (6)  ->  parallel-for row, col  ->  RF loops (6)  ->  MAC

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "automapper/hardware.hpp"
#include "automapper/workload.hpp"

namespace automapper {

using LoopOrder = std::array<LoopDim, kNumDims>;  // outermost first

inline constexpr LoopOrder kCanonicalOrder = kAllDims;

bool is_permutation(const LoopOrder& order) noexcept;

struct LevelMapping {
    LoopOrder order = kCanonicalOrder;
    std::array<std::int64_t, kNumDims> sizes{1, 1, 1, 1, 1, 1};

    std::int64_t size(LoopDim d) const noexcept { return sizes[index(d)]; }
    std::int64_t& size(LoopDim d) noexcept { return sizes[index(d)]; }

    bool operator==(const LevelMapping&) const = default;
};

struct SpatialMapping {
    LoopDim dim_row = LoopDim::K;
    LoopDim dim_col = LoopDim::C;
    std::int64_t size_row = 1;
    std::int64_t size_col = 1;

    // Parallel factor applied to `d`: size_row, size_col or 1.
    std::int64_t factor(LoopDim d) const noexcept {
        if (d == dim_row) return size_row;
        if (d == dim_col) return size_col;
        return 1;
    }
    std::int64_t pes() const noexcept { return size_row * size_col; }

    bool operator==(const SpatialMapping&) const = default;
};

struct LayerMapping {
    std::array<LevelMapping, kNumLevels> temporal;  // indexed by Level
    SpatialMapping spatial;

    const LevelMapping& at(Level l) const noexcept { return temporal[index(l)]; }
    LevelMapping& at(Level l) noexcept { return temporal[index(l)]; }

    // RF x spatial x GB x DRAM factor of `d`.
    std::int64_t tiled_extent(LoopDim d) const noexcept;

    bool operator==(const LayerMapping&) const = default;
};

// Whole layer at DRAM, spatial 1x1, canonical orders.
LayerMapping minimal_tile_mapping(const ConvLayerShape& layer);

struct NetworkMapping {
    std::vector<LayerMapping> per_layer;
    bool pipeline = false;  // false = multi-cycle

    bool operator==(const NetworkMapping&) const = default;
};

// Serialized form, keys in sorted order:
//   {"DRAM":{"order":[..],"sizes":{..}},"GB":{..},"RF":{..},"spatial":{..}}
nlohmann::json to_json(const LayerMapping& m);
nlohmann::json to_json(const NetworkMapping& nm);

// Structural checks only (permutation orders, positive sizes, distinct
// spatial dims). Tiling products and capacities are checked by validate().
LayerMapping parse_layer_mapping(const nlohmann::json& j, const std::string& field);
NetworkMapping parse_network_mapping(const nlohmann::json& j);
NetworkMapping load_network_mapping(const std::string& path);

// Compact dump of to_json(); byte-identical for equal mappings. Used to break
// ranking ties.
std::string canonical_string(const LayerMapping& m);
std::string canonical_string(const NetworkMapping& nm);

}  // namespace automapper
