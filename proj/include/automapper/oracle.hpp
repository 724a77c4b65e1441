#pragma once

#include <cstdint>

#include "automapper/costmodel.hpp"

namespace automapper {

inline constexpr std::uint64_t kDefaultSimulationCap = 1'000'000;

// Reference for access_counts(): walks the DRAM, GB and RF loops one
// iteration at a time with every PE of the parallel-for, records the
// relevant-index tuple of each tensor at each boundary, and counts tuple
// changes. Output tiles re-entered after a first visit also count a
// read-back. Throws SimulationTooLarge when the temporal iteration count
// exceeds `cap`.
AccessCounts oracle_simulate(const LayerMapping& m, const ConvLayerShape& layer,
                             std::uint64_t cap = kDefaultSimulationCap);

}  // namespace automapper
