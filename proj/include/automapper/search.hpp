#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "automapper/costmodel.hpp"
#include "automapper/mapspace.hpp"

namespace automapper {

enum class Objective : std::uint8_t { EDP, Energy, Latency };

std::string_view to_string(Objective o) noexcept;
std::optional<Objective> parse_objective(std::string_view name) noexcept;

double objective_value(const CostReport& cost, Objective o) noexcept;

struct SearchConfig {
    std::size_t n = 1000;         // population size
    std::size_t m = 300;          // offspring added / worst removed per step
    std::size_t k = 1;            // features perturbed per offspring
    std::uint64_t budget = 20000; // max evaluations
    std::optional<double> target; // stop once the best objective is <= target
    Objective objective = Objective::EDP;
    std::uint64_t seed = 0;
    unsigned jobs = 1;            // evaluation threads; never changes results
    DesignSpace space;

    // Throws std::invalid_argument unless 1 <= m <= n, 1 <= k <= F, budget >= n.
    void check(std::size_t feature_count) const;
};

// n = 1000, m = 30% of n, k = 30% of F rounded up, budget = 20 n.
SearchConfig default_search_config(std::size_t feature_count);

// Same, for a population of `n`.
SearchConfig scaled_search_config(std::size_t n, std::size_t feature_count);

enum class Termination : std::uint8_t { TargetMet, BudgetExhausted, SpaceExhausted };
std::string_view to_string(Termination t) noexcept;

struct HistoryPoint {
    std::uint64_t evaluation;  // 1-based evaluation index
    double objective;          // best so far

    bool operator==(const HistoryPoint&) const = default;
};

struct SearchResult {
    NetworkMapping best;
    NetworkCost best_cost;
    std::vector<HistoryPoint> history;  // one entry per improvement
    std::uint64_t evaluations_used = 0;
    Termination terminated_by = Termination::BudgetExhausted;

    bool operator==(const SearchResult&) const = default;
};

// Evolutionary loop: seed a pool with n random mappings, then alternately
// add m perturbed copies of uniformly drawn members and drop the worst m,
// until the target is met or the budget is spent. Ties in ranking go to the
// lexicographically smaller canonical serialization.
SearchResult evolutionary_search(const Network& net, const HardwareSpec& hw, int bits,
                                 const SearchConfig& cfg);

// Evaluates every valid mapping (both pipeline flags unless the space fixes
// one). Throws SpaceTooLarge if network_space_size() exceeds `cap`.
SearchResult exhaustive_search(const Network& net, const HardwareSpec& hw, int bits,
                               const BigInt& cap, Objective objective = Objective::EDP,
                               const DesignSpace& space = {});

struct BitwidthOutcome {
    std::optional<SearchResult> result;
    std::string error;                        // set when the search failed
    bool infeasible = false;                  // failure was InfeasibleLayer / SamplingExhausted
    std::optional<NetworkCost> shared_cost;   // 32-bit winner re-evaluated at this width

    bool ok() const noexcept { return result.has_value(); }
};

// One independent search per workload bit-width, seeded cfg.seed + index.
std::map<int, BitwidthOutcome> search_per_bitwidth(const Network& net, const HardwareSpec& hw,
                                                   const SearchConfig& cfg);

nlohmann::json to_json(const SearchResult& r);

}  // namespace automapper
