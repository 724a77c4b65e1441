#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "automapper/hardware.hpp"
#include "automapper/mapping.hpp"
#include "automapper/workload.hpp"

namespace automapper {

using Rng = std::mt19937_64;
using BigInt = boost::multiprecision::cpp_int;

inline constexpr int kMaxSamplingAttempts = 1000;

// ---------------------------------------------------------------------------
// Factorizations
// ---------------------------------------------------------------------------

using Factorization = std::vector<std::int64_t>;

// Every ordered tuple of `parts` positive integers whose product is n.
// Lexicographic order.
std::vector<Factorization> enumerate_factorizations(std::int64_t n, int parts);

// Closed form: product over prime powers p^e of C(e + parts - 1, parts - 1).
BigInt count_factorizations(std::int64_t n, int parts);

// Prime factorization as (prime, exponent) pairs, ascending.
std::vector<std::pair<std::int64_t, int>> prime_factors(std::int64_t n);

// ---------------------------------------------------------------------------
// Design space restriction
// ---------------------------------------------------------------------------

enum class PipelineChoice : std::uint8_t { Searched, On, Off };

// The searchable space. By default every level may use any of the 720 loop
// orders; tests and small experiments narrow that to a fixed list.
struct DesignSpace {
    std::vector<LoopOrder> orders;  // empty = all permutations
    PipelineChoice pipeline = PipelineChoice::Searched;

    std::size_t order_count() const noexcept;
    bool allows(const LoopOrder& order) const noexcept;
    bool allows_pipeline(bool flag) const noexcept;
};

// The 720 permutations in lexicographic order.
const std::vector<LoopOrder>& all_loop_orders();

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Rejection {
    enum class Kind : std::uint8_t { ProductMismatch, ArrayOverflow, CapacityExceeded, Pipeline };

    Kind kind = Kind::ProductMismatch;
    LoopDim dim = LoopDim::K;       // ProductMismatch
    Level level = Level::RF;        // CapacityExceeded
    std::int64_t needed = 0;        // bits (CapacityExceeded) or PEs (ArrayOverflow)
    std::int64_t available = 0;
    std::string detail;             // free text for Pipeline
    int layer = -1;                 // set by network-level checks

    std::string describe() const;
    bool operator==(const Rejection&) const = default;
};

// nullopt means the mapping is accepted.
std::optional<Rejection> validate(const LayerMapping& m, const ConvLayerShape& layer,
                                  const HardwareSpec& hw, int bits);

// Per-layer validation (against the row partition in pipeline mode) plus the
// pipeline feasibility rules.
std::optional<Rejection> validate_network(const NetworkMapping& nm, const Network& net,
                                          const HardwareSpec& hw, int bits);

// Hardware each layer is validated against: the full device, or its row
// partition when `pipeline` is set. nullopt if the partition is impossible.
std::optional<std::vector<HardwareSpec>> layer_devices(const Network& net, const HardwareSpec& hw,
                                                       bool pipeline);

// ---------------------------------------------------------------------------
// Sampling and perturbation
// ---------------------------------------------------------------------------

// Uniform draw per design factor, rejection-sampled on validate().
// Throws InfeasibleLayer or SamplingExhausted.
LayerMapping random_mapping(const ConvLayerShape& layer, const HardwareSpec& hw, int bits, Rng& rng,
                            const DesignSpace& space = {});

NetworkMapping random_network_mapping(const Network& net, const HardwareSpec& hw, int bits,
                                      Rng& rng, const DesignSpace& space = {});

// Per layer: 3 loop orders, 6 tiling vectors, 1 spatial assignment; plus the
// global pipeline flag.
inline constexpr std::size_t kFeaturesPerLayer = 10;
std::size_t feature_count(std::size_t num_layers) noexcept;

struct PerturbResult {
    NetworkMapping mapping;
    bool no_progress = false;  // every retry failed validation; mapping is the input
};

PerturbResult perturb(const NetworkMapping& nm, std::size_t k, const Network& net,
                      const HardwareSpec& hw, int bits, Rng& rng, const DesignSpace& space = {});

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

// Raw discrete choices, without capacity filtering:
//   orders^3 * prod_d |4-part factorizations of d| * 30 spatial pairs * 2
BigInt space_size(const ConvLayerShape& layer, const DesignSpace& space = {});

// Product over layers.
BigInt network_space_size(const Network& net, const DesignSpace& space = {});

double log10_big(const BigInt& v);

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

// Every mapping of `layer` that passes validate(), in a fixed order.
std::vector<LayerMapping> enumerate_valid_mappings(const ConvLayerShape& layer,
                                                   const HardwareSpec& hw, int bits,
                                                   const DesignSpace& space = {});

}  // namespace automapper
