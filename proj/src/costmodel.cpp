#include "automapper/costmodel.hpp"

#include <algorithm>
#include <climits>
#include <utility>

#include "automapper/errors.hpp"
#include "automapper/mapspace.hpp"

namespace automapper {

using nlohmann::json;

std::string_view to_string(TensorKind t) noexcept {
    switch (t) {
        case TensorKind::Weights: return "Weights";
        case TensorKind::Inputs: return "Inputs";
        case TensorKind::Outputs: return "Outputs";
    }
    return "?";
}

std::string_view to_string(Component c) noexcept {
    switch (c) {
        case Component::MAC: return "MAC";
        case Component::RF: return "RF";
        case Component::NoC: return "NoC";
        case Component::GB: return "GB";
        case Component::DRAM: return "DRAM";
    }
    return "?";
}

namespace {

std::int64_t sat_mul(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) {
        return INT64_MAX;
    }
    return r;
}

std::int64_t sat_add(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t r = 0;
    if (__builtin_add_overflow(a, b, &r)) {
        return INT64_MAX;
    }
    return r;
}

// Cumulative tile extent of `d` held at `level`.
std::int64_t tile_extent(const LayerMapping& m, Level level, LoopDim d) noexcept {
    std::int64_t e = m.at(Level::RF).size(d);
    if (level == Level::RF) {
        return e;
    }
    e = sat_mul(e, m.spatial.factor(d));
    e = sat_mul(e, m.at(Level::GB).size(d));
    if (level == Level::GB) {
        return e;
    }
    return sat_mul(e, m.at(Level::DRAM).size(d));
}

struct Loop {
    LoopDim dim;
    std::uint64_t bound;
};

// Relevant-index changes seen across a boundary while the loops above it run.
std::uint64_t tile_events(const std::vector<Loop>& above, TensorKind t) noexcept {
    std::size_t innermost = above.size();
    for (std::size_t i = 0; i < above.size(); ++i) {
        if (is_relevant(t, above[i].dim) && above[i].bound > 1) {
            innermost = i;
        }
    }
    if (innermost == above.size()) {
        return 1;
    }
    std::uint64_t e = 1;
    for (std::size_t i = 0; i <= innermost; ++i) {
        e *= above[i].bound;
    }
    return e;
}

// Distinct tiles of `t` visited across a boundary.
std::uint64_t distinct_tiles(const std::vector<Loop>& above, TensorKind t) noexcept {
    std::uint64_t d = 1;
    for (const Loop& l : above) {
        if (is_relevant(t, l.dim)) {
            d *= l.bound;
        }
    }
    return d;
}

std::uint64_t traffic_tile_words(const LayerMapping& m, Level level, TensorKind t) noexcept {
    std::uint64_t w = 1;
    for (LoopDim d : kAllDims) {
        if (is_relevant(t, d)) {
            w *= static_cast<std::uint64_t>(tile_extent(m, level, d));
        }
    }
    return w;
}

void append_level(std::vector<Loop>& loops, const LevelMapping& lm) {
    for (LoopDim d : lm.order) {
        loops.push_back(Loop{d, static_cast<std::uint64_t>(lm.size(d))});
    }
}

Traffic tensor_traffic(TensorKind t, std::uint64_t events, std::uint64_t distinct,
                       std::uint64_t tile_words) noexcept {
    Traffic tr;
    if (t == TensorKind::Outputs) {
        tr.writes = events * tile_words;
        tr.reads = (events - distinct) * tile_words;
    } else {
        tr.reads = events * tile_words;
    }
    return tr;
}

std::uint64_t ceil_div(unsigned __int128 num, std::uint64_t den) noexcept {
    unsigned __int128 q = (num + den - 1) / den;
    return q > UINT64_MAX ? UINT64_MAX : static_cast<std::uint64_t>(q);
}

std::uint64_t bandwidth_cycles(std::uint64_t words, int bits,
                               const std::optional<std::int64_t>& bw) noexcept {
    if (!bw) {
        return 0;
    }
    return ceil_div(static_cast<unsigned __int128>(words) * static_cast<unsigned>(bits),
                    static_cast<std::uint64_t>(*bw));
}

}  // namespace

std::int64_t footprint_words(const LayerMapping& m, Level level, TensorKind tensor,
                             const ConvLayerShape& layer) {
    auto ext = [&](LoopDim d) { return tile_extent(m, level, d); };
    switch (tensor) {
        case TensorKind::Weights:
            return sat_mul(sat_mul(ext(LoopDim::K), ext(LoopDim::C)),
                           sat_mul(ext(LoopDim::R), ext(LoopDim::S)));
        case TensorKind::Outputs:
            return sat_mul(ext(LoopDim::K), sat_mul(ext(LoopDim::X), ext(LoopDim::Y)));
        case TensorKind::Inputs: {
            std::int64_t cols = sat_add(sat_mul(ext(LoopDim::X) - 1, layer.stride), ext(LoopDim::S));
            std::int64_t rows = sat_add(sat_mul(ext(LoopDim::Y) - 1, layer.stride), ext(LoopDim::R));
            return sat_mul(ext(LoopDim::C), sat_mul(cols, rows));
        }
    }
    return 0;
}

std::int64_t footprint_bits(const LayerMapping& m, Level level, TensorKind tensor,
                            const ConvLayerShape& layer, int bits) {
    return sat_mul(footprint_words(m, level, tensor, layer), bits);
}

std::int64_t level_footprint_bits(const LayerMapping& m, Level level, const ConvLayerShape& layer,
                                  int bits) {
    std::int64_t total = 0;
    for (TensorKind t : kAllTensors) {
        total = sat_add(total, footprint_bits(m, level, t, layer, bits));
    }
    return total;
}

std::uint64_t total_words(const TensorTraffic& t) noexcept {
    std::uint64_t sum = 0;
    for (const Traffic& tr : t) {
        sum += tr.total();
    }
    return sum;
}

AccessCounts access_counts(const LayerMapping& m, const ConvLayerShape& layer) {
    AccessCounts ac;

    std::vector<Loop> above_gb;
    append_level(above_gb, m.at(Level::DRAM));
    std::vector<Loop> above_rf = above_gb;
    append_level(above_rf, m.at(Level::GB));

    const auto all_pes = static_cast<std::uint64_t>(m.spatial.pes());

    for (TensorKind t : kAllTensors) {
        const std::size_t ti = index(t);

        ac.dram_gb[ti] = tensor_traffic(t, tile_events(above_gb, t), distinct_tiles(above_gb, t),
                                        traffic_tile_words(m, Level::GB, t));

        // Parallel-for dims irrelevant to t share one GB transfer (multicast
        // for operands, spatial reduction for outputs); every PE still
        // receives its own copy.
        std::uint64_t relevant_pes = 1;
        if (is_relevant(t, m.spatial.dim_row)) relevant_pes *= static_cast<std::uint64_t>(m.spatial.size_row);
        if (is_relevant(t, m.spatial.dim_col)) relevant_pes *= static_cast<std::uint64_t>(m.spatial.size_col);

        const std::uint64_t events = tile_events(above_rf, t);
        const std::uint64_t distinct = distinct_tiles(above_rf, t);
        const std::uint64_t rf_words = traffic_tile_words(m, Level::RF, t);
        ac.gb_side[ti] = tensor_traffic(t, events * relevant_pes, distinct * relevant_pes, rf_words);
        ac.rf_side[ti] = tensor_traffic(t, events * all_pes, distinct * all_pes, rf_words);
    }

    ac.macs = static_cast<std::uint64_t>(total_macs(layer));
    ac.rf_operand_accesses = 4 * ac.macs;
    return ac;
}

AccessCounts& operator+=(AccessCounts& a, const AccessCounts& b) {
    for (std::size_t i = 0; i < kNumTensors; ++i) {
        a.dram_gb[i].reads += b.dram_gb[i].reads;
        a.dram_gb[i].writes += b.dram_gb[i].writes;
        a.gb_side[i].reads += b.gb_side[i].reads;
        a.gb_side[i].writes += b.gb_side[i].writes;
        a.rf_side[i].reads += b.rf_side[i].reads;
        a.rf_side[i].writes += b.rf_side[i].writes;
    }
    a.macs += b.macs;
    a.rf_operand_accesses += b.rf_operand_accesses;
    return a;
}

double CostReport::data_movement_energy() const noexcept {
    return total_energy - energy(Component::MAC);
}

namespace {

double sum_components(const std::array<double, kNumComponents>& e) noexcept {
    double total = 0.0;
    for (double v : e) {
        total += v;
    }
    return total;
}

}  // namespace

CostReport cost_from_counts(const AccessCounts& counts, std::int64_t active_pes,
                            const HardwareSpec& hw, int bits) {
    CostReport r;
    r.bits = bits;
    r.access_counts = counts;

    auto scaled = [&](std::uint64_t words, double energy_per_word) {
        return static_cast<double>(words) * energy_per_word * bits / hw.ref_bits;
    };
    auto& e = r.energy_by_component;
    e[index(Component::MAC)] = static_cast<double>(counts.macs) * hw.array.mac_energy;
    e[index(Component::RF)] = scaled(counts.rf_operand_accesses, hw.level(Level::RF).energy_per_word);
    e[index(Component::NoC)] = scaled(total_words(counts.rf_side), hw.array.noc_energy_per_word);
    e[index(Component::GB)] = scaled(total_words(counts.gb_side), hw.level(Level::GB).energy_per_word);
    e[index(Component::DRAM)] = scaled(total_words(counts.dram_gb), hw.level(Level::DRAM).energy_per_word);
    r.total_energy = sum_components(e);

    const std::uint64_t compute = ceil_div(counts.macs, static_cast<std::uint64_t>(std::max<std::int64_t>(active_pes, 1)));
    const std::uint64_t gb = bandwidth_cycles(total_words(counts.gb_side), bits,
                                              hw.level(Level::GB).bandwidth_bits_per_cycle);
    const std::uint64_t dram = bandwidth_cycles(total_words(counts.dram_gb), bits,
                                                hw.level(Level::DRAM).bandwidth_bits_per_cycle);
    r.cycles = std::max({compute, gb, dram});
    r.edp = r.total_energy * static_cast<double>(r.cycles);
    return r;
}

CostReport evaluate(const LayerMapping& m, const ConvLayerShape& layer, const HardwareSpec& hw,
                    int bits) {
    if (auto rejection = validate(m, layer, hw, bits)) {
        throw InvalidMapping("layer '" + layer.name + "': " + rejection->describe());
    }
    return cost_from_counts(access_counts(m, layer), m.spatial.pes(), hw, bits);
}

std::optional<std::vector<std::int64_t>> pipeline_rows(const Network& net, const HardwareSpec& hw) {
    const std::int64_t rows = hw.array.rows;
    const auto n = static_cast<std::int64_t>(net.layers.size());
    if (n == 0 || rows < n) {
        return std::nullopt;
    }
    __int128 total = 0;
    for (const auto& layer : net.layers) {
        total += total_macs(layer);
    }
    std::vector<std::int64_t> parts;
    std::int64_t assigned = 0;
    std::size_t largest = 0;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const std::int64_t macs = total_macs(net.layers[i]);
        auto share = static_cast<std::int64_t>(static_cast<__int128>(rows) * macs / total);
        share = std::max<std::int64_t>(share, 1);
        parts.push_back(share);
        assigned += share;
        if (macs > total_macs(net.layers[largest])) {
            largest = i;
        }
    }
    parts[largest] += rows - assigned;
    if (parts[largest] < 1) {
        return std::nullopt;
    }
    return parts;
}

HardwareSpec with_rows(const HardwareSpec& hw, std::int64_t rows) {
    HardwareSpec out = hw;
    out.array.rows = rows;
    return out;
}

std::optional<std::string> pipeline_problem(const NetworkMapping& nm, const Network& net,
                                            const HardwareSpec& hw, int bits) {
    if (!pipeline_rows(net, hw)) {
        return "PE array has " + std::to_string(hw.array.rows) + " rows for " +
               std::to_string(net.layers.size()) + " pipeline stages";
    }
    std::int64_t gb_bits = 0;
    for (std::size_t i = 0; i < net.layers.size() && i < nm.per_layer.size(); ++i) {
        gb_bits = sat_add(gb_bits, level_footprint_bits(nm.per_layer[i], Level::GB, net.layers[i], bits));
    }
    const std::int64_t capacity = hw.level(Level::GB).capacity_bits.value_or(INT64_MAX);
    if (gb_bits > capacity) {
        return "pipeline stages need " + std::to_string(gb_bits) + " GB bits, capacity is " +
               std::to_string(capacity);
    }
    return std::nullopt;
}

NetworkCost evaluate_network(const NetworkMapping& nm, const Network& net, const HardwareSpec& hw,
                             int bits) {
    if (nm.per_layer.size() != net.layers.size()) {
        throw InvalidMapping("mapping has " + std::to_string(nm.per_layer.size()) +
                             " layers, workload has " + std::to_string(net.layers.size()));
    }

    NetworkCost out;
    std::array<double, kNumComponents> energy{};

    if (!nm.pipeline) {
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            CostReport r = evaluate(nm.per_layer[i], net.layers[i], hw, bits);
            out.total.cycles += r.cycles;
            out.layers.push_back(std::move(r));
        }
    } else {
        auto rows = pipeline_rows(net, hw);
        if (!rows) {
            throw PipelineInfeasible(*pipeline_problem(nm, net, hw, bits));
        }
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            const HardwareSpec stage = with_rows(hw, (*rows)[i]);
            if (auto rej = validate(nm.per_layer[i], net.layers[i], stage, bits)) {
                const std::string msg = "layer '" + net.layers[i].name + "': " + rej->describe();
                if (rej->kind == Rejection::Kind::ArrayOverflow) {
                    throw PipelineInfeasible(msg + " (pipeline partition of " +
                                             std::to_string((*rows)[i]) + " rows)");
                }
                throw InvalidMapping(msg);
            }
        }
        if (auto problem = pipeline_problem(nm, net, hw, bits)) {
            throw PipelineInfeasible(*problem);
        }
        const std::size_t last = net.layers.size() - 1;
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            AccessCounts counts = access_counts(nm.per_layer[i], net.layers[i]);
            if (i < last) counts.dram_gb[index(TensorKind::Outputs)] = Traffic{};
            if (i > 0) counts.dram_gb[index(TensorKind::Inputs)] = Traffic{};
            CostReport r = cost_from_counts(counts, nm.per_layer[i].spatial.pes(),
                                            with_rows(hw, (*rows)[i]), bits);
            out.total.cycles = std::max(out.total.cycles, r.cycles);
            out.layers.push_back(std::move(r));
        }
    }

    for (const CostReport& r : out.layers) {
        for (std::size_t c = 0; c < kNumComponents; ++c) {
            energy[c] += r.energy_by_component[c];
        }
        out.total.access_counts += r.access_counts;
    }
    out.total.bits = bits;
    out.total.energy_by_component = energy;
    out.total.total_energy = sum_components(energy);
    out.total.edp = out.total.total_energy * static_cast<double>(out.total.cycles);
    return out;
}

json to_json(const AccessCounts& counts) {
    auto traffic = [](const TensorTraffic& tt) {
        json j = json::object();
        for (TensorKind t : kAllTensors) {
            const Traffic& tr = tt[index(t)];
            j[std::string(to_string(t))] = json{{"reads", tr.reads}, {"writes", tr.writes}};
        }
        return j;
    };
    return json{{"dram_gb", traffic(counts.dram_gb)},
                {"gb_side", traffic(counts.gb_side)},
                {"rf_side", traffic(counts.rf_side)},
                {"macs", counts.macs},
                {"rf_operand_accesses", counts.rf_operand_accesses}};
}

json to_json(const CostReport& report) {
    json energy = json::object();
    for (Component c : kAllComponents) {
        energy[std::string(to_string(c))] = report.energy(c);
    }
    return json{{"bits", report.bits},
                {"cycles", report.cycles},
                {"energy_by_component", std::move(energy)},
                {"total_energy", report.total_energy},
                {"edp", report.edp},
                {"access_counts", to_json(report.access_counts)}};
}

json to_json(const NetworkCost& cost) {
    json layers = json::array();
    for (const CostReport& r : cost.layers) {
        layers.push_back(to_json(r));
    }
    json j = to_json(cost.total);
    j["layers"] = std::move(layers);
    return j;
}

}  // namespace automapper
