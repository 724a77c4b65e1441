#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "automapper/hardware.hpp"
#include "automapper/mapping.hpp"
#include "automapper/workload.hpp"

namespace automapper {

enum class TensorKind : std::uint8_t { Weights, Inputs, Outputs };

inline constexpr std::size_t kNumTensors = 3;
inline constexpr std::array<TensorKind, kNumTensors> kAllTensors{
    TensorKind::Weights, TensorKind::Inputs, TensorKind::Outputs};

constexpr std::size_t index(TensorKind t) noexcept { return static_cast<std::size_t>(t); }
std::string_view to_string(TensorKind t) noexcept;

// Weights {K,C,R,S}; Inputs {C,X,Y,R,S}; Outputs {K,X,Y}.
constexpr bool is_relevant(TensorKind t, LoopDim d) noexcept {
    switch (t) {
        case TensorKind::Weights:
            return d == LoopDim::K || d == LoopDim::C || d == LoopDim::R || d == LoopDim::S;
        case TensorKind::Inputs:
            return d != LoopDim::K;
        case TensorKind::Outputs:
            return d == LoopDim::K || d == LoopDim::X || d == LoopDim::Y;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Footprints
// ---------------------------------------------------------------------------

// Words of `tensor` resident at `level` (RF per PE, GB chip-wide). Inputs use
// the halo extent (tile_out - 1) * stride + tile_kernel on X/S and Y/R.
// Saturates at INT64_MAX.
std::int64_t footprint_words(const LayerMapping& m, Level level, TensorKind tensor,
                             const ConvLayerShape& layer);
std::int64_t footprint_bits(const LayerMapping& m, Level level, TensorKind tensor,
                            const ConvLayerShape& layer, int bits);
// Sum over the three tensors; this is what validate() compares to capacity.
std::int64_t level_footprint_bits(const LayerMapping& m, Level level, const ConvLayerShape& layer,
                                  int bits);

// ---------------------------------------------------------------------------
// Access counts
// ---------------------------------------------------------------------------

// Words moving across a boundary. `reads` flow inward (fills from the outer
// level, or partial-sum read-back); `writes` flow outward (write-back).
struct Traffic {
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;

    std::uint64_t total() const noexcept { return reads + writes; }
    bool operator==(const Traffic&) const = default;
};

using TensorTraffic = std::array<Traffic, kNumTensors>;

std::uint64_t total_words(const TensorTraffic& t) noexcept;

struct AccessCounts {
    TensorTraffic dram_gb;   // DRAM <-> GB
    TensorTraffic gb_side;   // GB <-> NoC, multicast/reduction counted once
    TensorTraffic rf_side;   // NoC <-> RF, summed over every PE
    std::uint64_t macs = 0;
    std::uint64_t rf_operand_accesses = 0;  // 4 per MAC

    bool operator==(const AccessCounts&) const = default;
};

// Tile-change events across each boundary, per the innermost-relevant-loop
// rule. Loops with bound 1 never change an index and are ignored.
AccessCounts access_counts(const LayerMapping& m, const ConvLayerShape& layer);

AccessCounts& operator+=(AccessCounts& a, const AccessCounts& b);

// ---------------------------------------------------------------------------
// Cost
// ---------------------------------------------------------------------------

enum class Component : std::uint8_t { MAC, RF, NoC, GB, DRAM };
inline constexpr std::size_t kNumComponents = 5;
inline constexpr std::array<Component, kNumComponents> kAllComponents{
    Component::MAC, Component::RF, Component::NoC, Component::GB, Component::DRAM};
constexpr std::size_t index(Component c) noexcept { return static_cast<std::size_t>(c); }
std::string_view to_string(Component c) noexcept;

struct CostReport {
    std::uint64_t cycles = 0;
    std::array<double, kNumComponents> energy_by_component{};
    double total_energy = 0.0;
    double edp = 0.0;
    AccessCounts access_counts;
    int bits = 0;

    double energy(Component c) const noexcept { return energy_by_component[index(c)]; }
    // Everything except MAC.
    double data_movement_energy() const noexcept;

    bool operator==(const CostReport&) const = default;
};

// Energy and cycles from already-computed counts:
//   MAC  = macs * mac_energy
//   RF   = rf_operand_accesses * e_RF
//   NoC  = rf_side words * e_NoC
//   GB   = gb_side words * e_GB
//   DRAM = dram_gb words * e_DRAM
// every non-MAC term scaled by bits / ref_bits. Cycles are the max of
// ceil(macs / active PEs) and the GB and DRAM bandwidth bounds.
CostReport cost_from_counts(const AccessCounts& counts, std::int64_t active_pes,
                            const HardwareSpec& hw, int bits);

// Throws InvalidMapping when validate() rejects the mapping.
CostReport evaluate(const LayerMapping& m, const ConvLayerShape& layer, const HardwareSpec& hw,
                    int bits);

struct NetworkCost {
    CostReport total;
    std::vector<CostReport> layers;

    bool operator==(const NetworkCost&) const = default;
};

// Pipeline row partition: rows proportional to layer MACs (floor, minimum 1,
// remainder to the largest layer). nullopt when the array has too few rows.
std::optional<std::vector<std::int64_t>> pipeline_rows(const Network& net, const HardwareSpec& hw);

// Copy of `hw` with the PE array narrowed to `rows`.
HardwareSpec with_rows(const HardwareSpec& hw, std::int64_t rows);

// Reason the pipelined schedule cannot run, or nullopt. Assumes each layer
// mapping already passes validate() against its partition.
std::optional<std::string> pipeline_problem(const NetworkMapping& nm, const Network& net,
                                            const HardwareSpec& hw, int bits);

// Multi-cycle: layers run back to back on the whole array. Pipeline: layers
// run concurrently on row partitions, intermediate activations stay on chip.
// Throws InvalidMapping or PipelineInfeasible.
NetworkCost evaluate_network(const NetworkMapping& nm, const Network& net, const HardwareSpec& hw,
                             int bits);

nlohmann::json to_json(const AccessCounts& counts);
nlohmann::json to_json(const CostReport& report);
nlohmann::json to_json(const NetworkCost& cost);

}  // namespace automapper
