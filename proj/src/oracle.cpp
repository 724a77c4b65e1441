#include "automapper/oracle.hpp"

#include <optional>
#include <set>
#include <vector>

#include "automapper/errors.hpp"

namespace automapper {

namespace {

using Id = std::vector<std::int64_t>;

struct NestLoop {
    Level level;
    LoopDim dim;
    std::int64_t bound;
};

// Per-dimension loop indices at each temporal level plus the spatial index.
struct Indices {
    std::array<std::array<std::int64_t, kNumDims>, kNumLevels> temporal{};
    std::array<std::int64_t, kNumDims> spatial{};
};

// Global coordinate of `d`; tiling nests as DRAM > GB > parallel-for > RF.
std::int64_t coordinate(const LayerMapping& m, const Indices& ix, LoopDim d) {
    const std::size_t i = index(d);
    std::int64_t g = ix.temporal[index(Level::DRAM)][i];
    g = g * m.at(Level::GB).size(d) + ix.temporal[index(Level::GB)][i];
    g = g * m.spatial.factor(d) + ix.spatial[i];
    g = g * m.at(Level::RF).size(d) + ix.temporal[index(Level::RF)][i];
    return g;
}

// Runs `body` for every index combination of `loops` (last loop fastest).
template <typename Body>
void for_each_point(const std::vector<NestLoop>& loops, Indices& ix, Body&& body) {
    for (const NestLoop& l : loops) {
        ix.temporal[index(l.level)][index(l.dim)] = 0;
    }
    while (true) {
        body();
        std::size_t i = loops.size();
        while (i > 0) {
            --i;
            auto& v = ix.temporal[index(loops[i].level)][index(loops[i].dim)];
            if (++v < loops[i].bound) {
                break;
            }
            v = 0;
            if (i == 0) {
                return;
            }
        }
        if (loops.empty()) {
            return;
        }
    }
}

struct Pe {
    std::int64_t row;
    std::int64_t col;
};

void set_spatial(const LayerMapping& m, Indices& ix, const Pe& pe) {
    ix.spatial.fill(0);
    ix.spatial[index(m.spatial.dim_row)] = pe.row;
    ix.spatial[index(m.spatial.dim_col)] = pe.col;
}

// Distinct relevant-coordinate tuples touched by one tile: the loops below
// `level`'s parent are enumerated with every outer index held at zero.
std::uint64_t count_tile_words(const LayerMapping& m, Level level, TensorKind t,
                               const std::vector<Pe>& pes) {
    std::vector<NestLoop> inner;
    if (level == Level::GB) {
        for (LoopDim d : m.at(Level::GB).order) inner.push_back({Level::GB, d, m.at(Level::GB).size(d)});
    }
    for (LoopDim d : m.at(Level::RF).order) inner.push_back({Level::RF, d, m.at(Level::RF).size(d)});

    std::vector<Pe> tile_pes = level == Level::GB ? pes : std::vector<Pe>{{0, 0}};
    std::set<Id> seen;
    Indices ix;
    for (const Pe& pe : tile_pes) {
        set_spatial(m, ix, pe);
        for_each_point(inner, ix, [&] {
            Id id;
            for (LoopDim d : kAllDims) {
                if (is_relevant(t, d)) id.push_back(coordinate(m, ix, d));
            }
            seen.insert(std::move(id));
        });
    }
    return seen.size();
}

struct BoundaryTracker {
    std::optional<Id> previous;
    std::set<Id> visited;
};

// One transfer event of `words` for tensor t arriving at a tile `id`.
void record_event(Traffic& tr, TensorKind t, std::set<Id>& visited, const Id& id,
                  std::uint64_t words) {
    if (t == TensorKind::Outputs) {
        tr.writes += words;
        if (!visited.insert(id).second) {
            tr.reads += words;
        }
    } else {
        tr.reads += words;
    }
}

}  // namespace

AccessCounts oracle_simulate(const LayerMapping& m, [[maybe_unused]] const ConvLayerShape& layer,
                             std::uint64_t cap) {
    std::vector<NestLoop> nest;
    std::uint64_t iterations = 1;
    for (Level l : {Level::DRAM, Level::GB, Level::RF}) {
        for (LoopDim d : m.at(l).order) {
            const std::int64_t bound = m.at(l).size(d);
            nest.push_back({l, d, bound});
            if (__builtin_mul_overflow(iterations, static_cast<std::uint64_t>(bound), &iterations) ||
                iterations > cap) {
                throw SimulationTooLarge("loop nest exceeds the simulation cap of " +
                                         std::to_string(cap) + " temporal iterations");
            }
        }
    }

    std::vector<Pe> pes;
    for (std::int64_t r = 0; r < m.spatial.size_row; ++r) {
        for (std::int64_t c = 0; c < m.spatial.size_col; ++c) {
            pes.push_back({r, c});
        }
    }

    std::array<std::uint64_t, kNumTensors> gb_tile{};
    std::array<std::uint64_t, kNumTensors> rf_tile{};
    for (TensorKind t : kAllTensors) {
        gb_tile[index(t)] = count_tile_words(m, Level::GB, t, pes);
        rf_tile[index(t)] = count_tile_words(m, Level::RF, t, pes);
    }

    AccessCounts ac;
    std::array<BoundaryTracker, kNumTensors> dram_side;
    std::array<std::set<Id>, kNumTensors> gb_visited;
    std::vector<std::array<BoundaryTracker, kNumTensors>> per_pe(pes.size());

    Indices ix;
    for_each_point(nest, ix, [&] {
        for (TensorKind t : kAllTensors) {
            const std::size_t ti = index(t);

            Id dram_id;
            Id temporal_id;
            for (LoopDim d : kAllDims) {
                if (!is_relevant(t, d)) continue;
                dram_id.push_back(ix.temporal[index(Level::DRAM)][index(d)]);
                temporal_id.push_back(ix.temporal[index(Level::DRAM)][index(d)]);
                temporal_id.push_back(ix.temporal[index(Level::GB)][index(d)]);
            }
            BoundaryTracker& dt = dram_side[ti];
            if (dt.previous != dram_id) {
                record_event(ac.dram_gb[ti], t, dt.visited, dram_id, gb_tile[ti]);
                dt.previous = dram_id;
            }

            std::set<Id> requested;
            for (std::size_t p = 0; p < pes.size(); ++p) {
                Id pe_id = temporal_id;
                if (is_relevant(t, m.spatial.dim_row)) pe_id.push_back(pes[p].row);
                if (is_relevant(t, m.spatial.dim_col)) pe_id.push_back(pes[p].col);
                BoundaryTracker& pt = per_pe[p][ti];
                if (pt.previous != temporal_id) {
                    record_event(ac.rf_side[ti], t, pt.visited, temporal_id, rf_tile[ti]);
                    pt.previous = temporal_id;
                    requested.insert(std::move(pe_id));
                }
            }
            for (const Id& id : requested) {
                record_event(ac.gb_side[ti], t, gb_visited[ti], id, rf_tile[ti]);
            }
        }
        for (std::size_t p = 0; p < pes.size(); ++p) {
            ++ac.macs;
            ac.rf_operand_accesses += 4;
        }
    });

    return ac;
}

}  // namespace automapper
