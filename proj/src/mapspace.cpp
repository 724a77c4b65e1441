#include "automapper/mapspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "automapper/costmodel.hpp"
#include "automapper/errors.hpp"

namespace automapper {

// ---------------------------------------------------------------------------
// Factorizations
// ---------------------------------------------------------------------------

std::vector<std::pair<std::int64_t, int>> prime_factors(std::int64_t n) {
    std::vector<std::pair<std::int64_t, int>> out;
    for (std::int64_t p = 2; p <= n / p; ++p) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e > 0) out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

namespace {

std::vector<std::int64_t> divisors(std::int64_t n) {
    std::vector<std::int64_t> small;
    std::vector<std::int64_t> large;
    for (std::int64_t d = 1; d <= n / d; ++d) {
        if (n % d == 0) {
            small.push_back(d);
            if (d != n / d) large.push_back(n / d);
        }
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

void enumerate_into(std::int64_t n, int parts, Factorization& prefix,
                    std::vector<Factorization>& out) {
    if (parts == 1) {
        prefix.push_back(n);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (std::int64_t d : divisors(n)) {
        prefix.push_back(d);
        enumerate_into(n / d, parts - 1, prefix, out);
        prefix.pop_back();
    }
}

BigInt binomial(int n, int k) {
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

}  // namespace

std::vector<Factorization> enumerate_factorizations(std::int64_t n, int parts) {
    std::vector<Factorization> out;
    if (n < 1 || parts < 1) {
        return out;
    }
    Factorization prefix;
    enumerate_into(n, parts, prefix, out);
    return out;
}

BigInt count_factorizations(std::int64_t n, int parts) {
    if (n < 1 || parts < 1) {
        return 0;
    }
    BigInt count = 1;
    for (const auto& [p, e] : prime_factors(n)) {
        count *= binomial(e + parts - 1, parts - 1);
    }
    return count;
}

// ---------------------------------------------------------------------------
// Design space
// ---------------------------------------------------------------------------

const std::vector<LoopOrder>& all_loop_orders() {
    static const std::vector<LoopOrder> orders = [] {
        std::vector<LoopOrder> v;
        LoopOrder o = kCanonicalOrder;
        do {
            v.push_back(o);
        } while (std::next_permutation(o.begin(), o.end()));
        return v;
    }();
    return orders;
}

std::size_t DesignSpace::order_count() const noexcept {
    return orders.empty() ? all_loop_orders().size() : orders.size();
}

bool DesignSpace::allows(const LoopOrder& order) const noexcept {
    if (orders.empty()) {
        return is_permutation(order);
    }
    return std::find(orders.begin(), orders.end(), order) != orders.end();
}

bool DesignSpace::allows_pipeline(bool flag) const noexcept {
    switch (pipeline) {
        case PipelineChoice::Searched: return true;
        case PipelineChoice::On: return flag;
        case PipelineChoice::Off: return !flag;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::string Rejection::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::ProductMismatch:
            os << "ProductMismatch(" << to_string(dim) << ")";
            break;
        case Kind::ArrayOverflow:
            os << "ArrayOverflow: " << detail;
            break;
        case Kind::CapacityExceeded:
            os << "CapacityExceeded(" << to_string(level) << "): needs " << needed
               << " bits, available " << available;
            break;
        case Kind::Pipeline:
            os << "PipelineInfeasible: " << detail;
            break;
    }
    if (layer >= 0) {
        os << " [layer " << layer << "]";
    }
    return os.str();
}

std::optional<Rejection> validate(const LayerMapping& m, const ConvLayerShape& layer,
                                  const HardwareSpec& hw, int bits) {
    for (LoopDim d : kAllDims) {
        std::int64_t product = 1;
        bool overflow = false;
        for (std::int64_t f : {m.at(Level::RF).size(d), m.spatial.factor(d), m.at(Level::GB).size(d),
                               m.at(Level::DRAM).size(d)}) {
            overflow |= __builtin_mul_overflow(product, f, &product);
        }
        if (overflow || product != layer.extent(d)) {
            Rejection r;
        r.kind = Rejection::Kind::ProductMismatch;
            r.dim = d;
            return r;
        }
    }

    if (m.spatial.size_row > hw.array.rows || m.spatial.size_col > hw.array.cols) {
        Rejection r;
        r.kind = Rejection::Kind::ArrayOverflow;
        r.needed = m.spatial.pes();
        r.available = hw.array.total_pes();
        r.detail = "spatial " + std::to_string(m.spatial.size_row) + "x" +
                   std::to_string(m.spatial.size_col) + " exceeds the " +
                   std::to_string(hw.array.rows) + "x" + std::to_string(hw.array.cols) + " array";
        return r;
    }

    for (Level l : {Level::RF, Level::GB}) {
        const std::int64_t need = level_footprint_bits(m, l, layer, bits);
        const std::int64_t have = hw.level(l).capacity_bits.value_or(INT64_MAX);
        if (need > have) {
            Rejection r;
        r.kind = Rejection::Kind::CapacityExceeded;
            r.level = l;
            r.needed = need;
            r.available = have;
            return r;
        }
    }
    return std::nullopt;
}

std::optional<std::vector<HardwareSpec>> layer_devices(const Network& net, const HardwareSpec& hw,
                                                       bool pipeline) {
    if (!pipeline) {
        return std::vector<HardwareSpec>(net.layers.size(), hw);
    }
    auto rows = pipeline_rows(net, hw);
    if (!rows) {
        return std::nullopt;
    }
    std::vector<HardwareSpec> out;
    for (std::int64_t r : *rows) {
        out.push_back(with_rows(hw, r));
    }
    return out;
}

std::optional<Rejection> validate_network(const NetworkMapping& nm, const Network& net,
                                          const HardwareSpec& hw, int bits) {
    auto pipeline_rejection = [](std::string detail) {
        Rejection r;
        r.kind = Rejection::Kind::Pipeline;
        r.detail = std::move(detail);
        return r;
    };
    if (nm.per_layer.size() != net.layers.size()) {
        return pipeline_rejection("mapping has " + std::to_string(nm.per_layer.size()) +
                                  " layers, workload has " + std::to_string(net.layers.size()));
    }
    auto devices = layer_devices(net, hw, nm.pipeline);
    if (!devices) {
        return pipeline_rejection(pipeline_problem(nm, net, hw, bits).value_or("row partition failed"));
    }
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (auto r = validate(nm.per_layer[i], net.layers[i], (*devices)[i], bits)) {
            r->layer = static_cast<int>(i);
            return r;
        }
    }
    if (nm.pipeline) {
        if (auto problem = pipeline_problem(nm, net, hw, bits)) {
            return pipeline_rejection(*problem);
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

const LoopOrder& sample_order(Rng& rng, const DesignSpace& space) {
    const auto& pool = space.orders.empty() ? all_loop_orders() : space.orders;
    return pool[uniform_index(rng, pool.size())];
}

// Uniform composition of `e` into `parts` non-negative slots (stars and bars).
std::vector<int> sample_composition(Rng& rng, int e, int parts) {
    const int slots = e + parts - 1;
    std::vector<int> positions(static_cast<std::size_t>(slots));
    std::iota(positions.begin(), positions.end(), 0);
    for (int i = 0; i < parts - 1; ++i) {
        std::size_t j = static_cast<std::size_t>(i) + uniform_index(rng, static_cast<std::size_t>(slots - i));
        std::swap(positions[static_cast<std::size_t>(i)], positions[j]);
    }
    std::vector<int> bars(positions.begin(), positions.begin() + (parts - 1));
    std::sort(bars.begin(), bars.end());
    std::vector<int> out;
    int prev = -1;
    for (int b : bars) {
        out.push_back(b - prev - 1);
        prev = b;
    }
    out.push_back(slots - prev - 1);
    return out;
}

// Uniform over the ordered `parts`-factorizations of n.
Factorization sample_factorization(Rng& rng, int parts,
                                   const std::vector<std::pair<std::int64_t, int>>& primes) {
    Factorization f(static_cast<std::size_t>(parts), 1);
    for (const auto& [p, e] : primes) {
        std::vector<int> split = sample_composition(rng, e, parts);
        for (int i = 0; i < parts; ++i) {
            for (int j = 0; j < split[static_cast<std::size_t>(i)]; ++j) {
                f[static_cast<std::size_t>(i)] *= p;
            }
        }
    }
    return f;
}

// Spatial role of a dimension in the tiling vector.
struct SpatialSlot {
    bool active = false;
    std::int64_t limit = 1;
    bool is_row = false;
};

SpatialSlot spatial_slot(const LayerMapping& m, LoopDim d, const HardwareSpec& hw) {
    if (d == m.spatial.dim_row) return {true, hw.array.rows, true};
    if (d == m.spatial.dim_col) return {true, hw.array.cols, false};
    return {};
}

// Draws the (RF, GB, DRAM[, spatial]) tiling vector of `d` and writes it into m.
void resample_tiling(LayerMapping& m, LoopDim d, const ConvLayerShape& layer,
                     const HardwareSpec& hw, Rng& rng) {
    const std::int64_t n = layer.extent(d);
    const auto primes = prime_factors(n);
    const SpatialSlot slot = spatial_slot(m, d, hw);

    Factorization f;
    if (!slot.active) {
        f = sample_factorization(rng, 3, primes);
        f.push_back(1);
    } else {
        constexpr int kTries = 256;
        bool found = false;
        for (int i = 0; i < kTries && !found; ++i) {
            f = sample_factorization(rng, 4, primes);
            found = f[3] <= slot.limit;
        }
        if (!found) {
            std::vector<Factorization> admissible;
            for (auto& cand : enumerate_factorizations(n, 4)) {
                if (cand[3] <= slot.limit) admissible.push_back(std::move(cand));
            }
            f = admissible[uniform_index(rng, admissible.size())];
        }
    }

    m.at(Level::RF).size(d) = f[0];
    m.at(Level::GB).size(d) = f[1];
    m.at(Level::DRAM).size(d) = f[2];
    if (slot.active) {
        (slot.is_row ? m.spatial.size_row : m.spatial.size_col) = f[3];
    }
}

std::pair<LoopDim, LoopDim> sample_spatial_pair(Rng& rng) {
    const std::size_t row = uniform_index(rng, kNumDims);
    std::size_t col = uniform_index(rng, kNumDims - 1);
    if (col >= row) ++col;
    return {kAllDims[row], kAllDims[col]};
}

// Assigns a new dimension pair to the parallel-for and redraws the tiling of
// every dimension whose spatial role changed.
void resample_spatial(LayerMapping& m, const ConvLayerShape& layer, const HardwareSpec& hw,
                      Rng& rng) {
    const auto [row, col] = sample_spatial_pair(rng);
    const std::array<LoopDim, 4> touched{m.spatial.dim_row, m.spatial.dim_col, row, col};
    m.spatial = SpatialMapping{row, col, 1, 1};
    std::array<bool, kNumDims> done{};
    for (LoopDim d : touched) {
        if (!done[index(d)]) {
            resample_tiling(m, d, layer, hw, rng);
            done[index(d)] = true;
        }
    }
}

LayerMapping draw_mapping(const ConvLayerShape& layer, const HardwareSpec& hw, Rng& rng,
                          const DesignSpace& space) {
    LayerMapping m;
    for (Level l : kAllLevels) {
        m.at(l).order = sample_order(rng, space);
    }
    const auto [row, col] = sample_spatial_pair(rng);
    m.spatial = SpatialMapping{row, col, 1, 1};
    for (LoopDim d : kAllDims) {
        resample_tiling(m, d, layer, hw, rng);
    }
    return m;
}

LayerMapping minimal_in_space(const ConvLayerShape& layer, const DesignSpace& space) {
    LayerMapping m = minimal_tile_mapping(layer);
    if (!space.orders.empty()) {
        for (Level l : kAllLevels) m.at(l).order = space.orders.front();
    }
    return m;
}

bool sample_pipeline_flag(Rng& rng, const DesignSpace& space) {
    switch (space.pipeline) {
        case PipelineChoice::On: return true;
        case PipelineChoice::Off: return false;
        case PipelineChoice::Searched: return uniform_index(rng, 2) == 1;
    }
    return false;
}

}  // namespace

LayerMapping random_mapping(const ConvLayerShape& layer, const HardwareSpec& hw, int bits, Rng& rng,
                            const DesignSpace& space) {
    if (validate(minimal_in_space(layer, space), layer, hw, bits)) {
        throw InfeasibleLayer(layer.name);
    }
    for (int attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
        LayerMapping m = draw_mapping(layer, hw, rng, space);
        if (!validate(m, layer, hw, bits)) {
            return m;
        }
    }
    throw SamplingExhausted(layer.name);
}

NetworkMapping random_network_mapping(const Network& net, const HardwareSpec& hw, int bits,
                                      Rng& rng, const DesignSpace& space) {
    for (int attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
        NetworkMapping nm;
        nm.pipeline = sample_pipeline_flag(rng, space);
        auto devices = layer_devices(net, hw, nm.pipeline);
        if (!devices) {
            if (space.pipeline == PipelineChoice::On) {
                throw PipelineInfeasible(pipeline_problem(nm, net, hw, bits).value_or("row partition failed"));
            }
            nm.pipeline = false;
            devices = layer_devices(net, hw, false);
        }
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            nm.per_layer.push_back(random_mapping(net.layers[i], (*devices)[i], bits, rng, space));
        }
        if (!nm.pipeline || !pipeline_problem(nm, net, hw, bits)) {
            return nm;
        }
    }
    if (space.pipeline == PipelineChoice::On) {
        throw PipelineInfeasible("no sampled pipelined mapping fits the global buffer");
    }
    // Pipelined draws keep overflowing the GB; fall back to multi-cycle.
    NetworkMapping nm;
    for (const auto& layer : net.layers) {
        nm.per_layer.push_back(random_mapping(layer, hw, bits, rng, space));
    }
    return nm;
}

std::size_t feature_count(std::size_t num_layers) noexcept {
    return kFeaturesPerLayer * num_layers + 1;
}

PerturbResult perturb(const NetworkMapping& nm, std::size_t k, const Network& net,
                      const HardwareSpec& hw, int bits, Rng& rng, const DesignSpace& space) {
    const std::size_t features = feature_count(net.layers.size());
    const std::size_t pipeline_feature = features - 1;
    k = std::clamp<std::size_t>(k, 1, features);

    std::vector<std::size_t> ids(features);
    for (int attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
        std::iota(ids.begin(), ids.end(), std::size_t{0});
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(ids[i], ids[i + uniform_index(rng, features - i)]);
        }
        std::vector<std::size_t> chosen(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(chosen.begin(), chosen.end());

        NetworkMapping cand = nm;
        if (chosen.back() == pipeline_feature && space.pipeline == PipelineChoice::Searched) {
            cand.pipeline = !cand.pipeline;
        }
        auto devices = layer_devices(net, hw, cand.pipeline);
        if (!devices) {
            continue;
        }
        for (std::size_t f : chosen) {
            if (f == pipeline_feature) continue;
            const std::size_t li = f / kFeaturesPerLayer;
            const std::size_t slot = f % kFeaturesPerLayer;
            LayerMapping& m = cand.per_layer[li];
            const ConvLayerShape& layer = net.layers[li];
            const HardwareSpec& device = (*devices)[li];
            if (slot < kNumLevels) {
                m.at(kAllLevels[slot]).order = sample_order(rng, space);
            } else if (slot < kNumLevels + kNumDims) {
                resample_tiling(m, kAllDims[slot - kNumLevels], layer, device, rng);
            } else {
                resample_spatial(m, layer, device, rng);
            }
        }
        if (!validate_network(cand, net, hw, bits)) {
            return PerturbResult{std::move(cand), false};
        }
    }
    return PerturbResult{nm, true};
}

// ---------------------------------------------------------------------------
// Counting and enumeration
// ---------------------------------------------------------------------------

BigInt space_size(const ConvLayerShape& layer, const DesignSpace& space) {
    BigInt orders = space.order_count();
    BigInt size = orders * orders * orders;
    for (LoopDim d : kAllDims) {
        size *= count_factorizations(layer.extent(d), 4);
    }
    size *= kNumDims * (kNumDims - 1);
    size *= space.pipeline == PipelineChoice::Searched ? 2 : 1;
    return size;
}

BigInt network_space_size(const Network& net, const DesignSpace& space) {
    BigInt total = 1;
    for (const auto& layer : net.layers) {
        total *= space_size(layer, space);
    }
    return total;
}

double log10_big(const BigInt& v) {
    if (v <= 0) {
        return -INFINITY;
    }
    const std::string digits = v.str();
    constexpr std::size_t kLead = 17;
    const std::size_t lead = std::min(kLead, digits.size());
    const double mantissa = std::stod(digits.substr(0, lead));
    return std::log10(mantissa) + static_cast<double>(digits.size() - lead);
}

std::vector<LayerMapping> enumerate_valid_mappings(const ConvLayerShape& layer,
                                                   const HardwareSpec& hw, int bits,
                                                   const DesignSpace& space) {
    const auto& orders = space.orders.empty() ? all_loop_orders() : space.orders;
    std::vector<LayerMapping> out;

    for (LoopDim row : kAllDims) {
        for (LoopDim col : kAllDims) {
            if (row == col) continue;

            // Tiling choices per dimension under this spatial assignment.
            std::array<std::vector<Factorization>, kNumDims> choices;
            for (LoopDim d : kAllDims) {
                const std::int64_t n = layer.extent(d);
                if (d == row || d == col) {
                    const std::int64_t limit = d == row ? hw.array.rows : hw.array.cols;
                    for (auto& f : enumerate_factorizations(n, 4)) {
                        if (f[3] <= limit) choices[index(d)].push_back(std::move(f));
                    }
                } else {
                    for (auto& f : enumerate_factorizations(n, 3)) {
                        f.push_back(1);
                        choices[index(d)].push_back(std::move(f));
                    }
                }
            }

            std::array<std::size_t, kNumDims> pick{};
            while (true) {
                LayerMapping m;
                m.spatial = SpatialMapping{row, col, 1, 1};
                for (LoopDim d : kAllDims) {
                    const Factorization& f = choices[index(d)][pick[index(d)]];
                    m.at(Level::RF).size(d) = f[0];
                    m.at(Level::GB).size(d) = f[1];
                    m.at(Level::DRAM).size(d) = f[2];
                    if (d == row) m.spatial.size_row = f[3];
                    if (d == col) m.spatial.size_col = f[3];
                }
                // Validity does not depend on loop order.
                if (!validate(m, layer, hw, bits)) {
                    for (const LoopOrder& o_rf : orders) {
                        for (const LoopOrder& o_gb : orders) {
                            for (const LoopOrder& o_dram : orders) {
                                m.at(Level::RF).order = o_rf;
                                m.at(Level::GB).order = o_gb;
                                m.at(Level::DRAM).order = o_dram;
                                out.push_back(m);
                            }
                        }
                    }
                }
                std::size_t i = 0;
                while (i < kNumDims) {
                    if (++pick[i] < choices[i].size()) break;
                    pick[i] = 0;
                    ++i;
                }
                if (i == kNumDims) break;
            }
        }
    }
    return out;
}

}  // namespace automapper
