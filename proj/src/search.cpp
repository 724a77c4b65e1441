#include "automapper/search.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <stdexcept>
#include <thread>

#include "automapper/errors.hpp"

namespace automapper {

using nlohmann::json;

std::string_view to_string(Objective o) noexcept {
    switch (o) {
        case Objective::EDP: return "edp";
        case Objective::Energy: return "energy";
        case Objective::Latency: return "latency";
    }
    return "?";
}

std::optional<Objective> parse_objective(std::string_view name) noexcept {
    for (Objective o : {Objective::EDP, Objective::Energy, Objective::Latency}) {
        if (to_string(o) == name) return o;
    }
    return std::nullopt;
}

std::string_view to_string(Termination t) noexcept {
    switch (t) {
        case Termination::TargetMet: return "TargetMet";
        case Termination::BudgetExhausted: return "BudgetExhausted";
        case Termination::SpaceExhausted: return "SpaceExhausted";
    }
    return "?";
}

double objective_value(const CostReport& cost, Objective o) noexcept {
    switch (o) {
        case Objective::EDP: return cost.edp;
        case Objective::Energy: return cost.total_energy;
        case Objective::Latency: return static_cast<double>(cost.cycles);
    }
    return cost.edp;
}

void SearchConfig::check(std::size_t feature_count) const {
    if (n < 1) throw std::invalid_argument("population size n must be >= 1");
    if (m < 1 || m > n) throw std::invalid_argument("m must lie in [1, n]");
    if (k < 1 || k > feature_count) throw std::invalid_argument("k must lie in [1, feature count]");
    if (budget < n) throw std::invalid_argument("budget must be >= n");
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

SearchConfig scaled_search_config(std::size_t n, std::size_t feature_count) {
    SearchConfig cfg;
    cfg.n = n;
    cfg.m = std::max<std::size_t>(1, 3 * n / 10);
    cfg.k = std::clamp<std::size_t>((3 * feature_count + 9) / 10, 1, std::max<std::size_t>(feature_count, 1));
    cfg.budget = 20 * static_cast<std::uint64_t>(n);
    return cfg;
}

SearchConfig default_search_config(std::size_t feature_count) {
    return scaled_search_config(1000, feature_count);
}

namespace {

struct Candidate {
    NetworkMapping mapping;
    NetworkCost cost;
    double objective = 0.0;
    mutable std::optional<std::string> key;

    const std::string& canonical() const {
        if (!key) key = canonical_string(mapping);
        return *key;
    }
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    return a.canonical() < b.canonical();
}

// Costs are written by index, so the thread count cannot change results.
std::vector<NetworkCost> evaluate_batch(const std::vector<NetworkMapping>& batch, const Network& net,
                                        const HardwareSpec& hw, int bits, unsigned jobs) {
    std::vector<NetworkCost> out(batch.size());
    const unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(batch.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < batch.size(); ++i) {
            out[i] = evaluate_network(batch[i], net, hw, bits);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < batch.size(); i = next++) {
                    out[i] = evaluate_network(batch[i], net, hw, bits);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

class Tracker {
public:
    explicit Tracker(std::optional<double> target) : target_(target) {}

    void observe(double objective) {
        ++evaluations_;
        if (history_.empty() || objective < history_.back().objective) {
            history_.push_back({evaluations_, objective});
        }
    }
    bool target_met() const {
        return target_ && !history_.empty() && history_.back().objective <= *target_;
    }
    std::uint64_t evaluations() const { return evaluations_; }
    std::vector<HistoryPoint>& history() { return history_; }

private:
    std::optional<double> target_;
    std::uint64_t evaluations_ = 0;
    std::vector<HistoryPoint> history_;
};

}  // namespace

SearchResult evolutionary_search(const Network& net, const HardwareSpec& hw, int bits,
                                 const SearchConfig& cfg) {
    cfg.check(feature_count(net.layers.size()));
    Rng rng(cfg.seed);
    Tracker tracker(cfg.target);
    std::vector<Candidate> pool;

    auto admit = [&](std::vector<NetworkMapping> batch) {
        std::vector<NetworkCost> costs = evaluate_batch(batch, net, hw, bits, cfg.jobs);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            Candidate c{std::move(batch[i]), std::move(costs[i]), 0.0, std::nullopt};
            c.objective = objective_value(c.cost.total, cfg.objective);
            tracker.observe(c.objective);
            pool.push_back(std::move(c));
        }
    };

    {
        std::vector<NetworkMapping> initial;
        initial.reserve(cfg.n);
        for (std::size_t i = 0; i < cfg.n; ++i) {
            initial.push_back(random_network_mapping(net, hw, bits, rng, cfg.space));
        }
        admit(std::move(initial));
    }

    while (!tracker.target_met() && tracker.evaluations() < cfg.budget) {
        if (pool.size() <= cfg.n) {
            const auto count = static_cast<std::size_t>(
                std::min<std::uint64_t>(cfg.m, cfg.budget - tracker.evaluations()));
            std::vector<NetworkMapping> offspring;
            offspring.reserve(count);
            for (std::size_t i = 0; i < count; ++i) {
                const Candidate& parent = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
                offspring.push_back(
                    perturb(parent.mapping, cfg.k, net, hw, bits, rng, cfg.space).mapping);
            }
            admit(std::move(offspring));
        } else {
            std::sort(pool.begin(), pool.end(), better);
            pool.resize(pool.size() - std::min(cfg.m, pool.size() - 1));
        }
    }

    const Candidate& best = *std::min_element(pool.begin(), pool.end(), better);
    SearchResult result;
    result.best = best.mapping;
    result.best_cost = best.cost;
    result.terminated_by = tracker.target_met() ? Termination::TargetMet : Termination::BudgetExhausted;
    result.history = std::move(tracker.history());
    result.evaluations_used = tracker.evaluations();
    return result;
}

SearchResult exhaustive_search(const Network& net, const HardwareSpec& hw, int bits,
                               const BigInt& cap, Objective objective, const DesignSpace& space) {
    const BigInt size = network_space_size(net, space);
    if (size > cap) {
        throw SpaceTooLarge(size.str(), cap.str());
    }

    Tracker tracker(std::nullopt);
    std::optional<Candidate> best;

    for (bool pipeline : {false, true}) {
        if (!space.allows_pipeline(pipeline)) continue;
        auto devices = layer_devices(net, hw, pipeline);
        if (!devices) continue;

        std::vector<std::vector<LayerMapping>> per_layer;
        bool empty = false;
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            per_layer.push_back(enumerate_valid_mappings(net.layers[i], (*devices)[i], bits, space));
            empty |= per_layer.back().empty();
        }
        if (empty) continue;

        std::vector<std::size_t> pick(net.layers.size(), 0);
        while (true) {
            Candidate c;
            c.mapping.pipeline = pipeline;
            for (std::size_t i = 0; i < pick.size(); ++i) {
                c.mapping.per_layer.push_back(per_layer[i][pick[i]]);
            }
            if (!pipeline || !pipeline_problem(c.mapping, net, hw, bits)) {
                c.cost = evaluate_network(c.mapping, net, hw, bits);
                c.objective = objective_value(c.cost.total, objective);
                tracker.observe(c.objective);
                if (!best || better(c, *best)) {
                    best = std::move(c);
                }
            }
            std::size_t i = 0;
            while (i < pick.size()) {
                if (++pick[i] < per_layer[i].size()) break;
                pick[i] = 0;
                ++i;
            }
            if (i == pick.size()) break;
        }
    }

    if (!best) {
        for (const auto& layer : net.layers) {
            if (enumerate_valid_mappings(layer, hw, bits, space).empty()) {
                throw InfeasibleLayer(layer.name);
            }
        }
        throw PipelineInfeasible("no valid network mapping in the design space");
    }

    SearchResult result;
    result.best = best->mapping;
    result.best_cost = best->cost;
    result.history = std::move(tracker.history());
    result.evaluations_used = tracker.evaluations();
    result.terminated_by = Termination::SpaceExhausted;
    return result;
}

std::map<int, BitwidthOutcome> search_per_bitwidth(const Network& net, const HardwareSpec& hw,
                                                   const SearchConfig& cfg) {
    std::map<int, BitwidthOutcome> out;
    for (std::size_t i = 0; i < net.bitwidths.size(); ++i) {
        const int bits = net.bitwidths[i];
        SearchConfig local = cfg;
        local.seed = cfg.seed + i;
        BitwidthOutcome outcome;
        try {
            outcome.result = evolutionary_search(net, hw, bits, local);
        } catch (const InfeasibleLayer& e) {
            outcome.error = e.what();
            outcome.infeasible = true;
        } catch (const SamplingExhausted& e) {
            outcome.error = e.what();
            outcome.infeasible = true;
        } catch (const Error& e) {
            outcome.error = e.what();
        }
        out.emplace(bits, std::move(outcome));
    }

    auto reference = out.find(32);
    if (reference != out.end() && reference->second.ok()) {
        const NetworkMapping shared = reference->second.result->best;
        for (auto& [bits, outcome] : out) {
            if (validate_network(shared, net, hw, bits)) continue;
            outcome.shared_cost = evaluate_network(shared, net, hw, bits);
        }
    }
    return out;
}

json to_json(const SearchResult& r) {
    json history = json::array();
    for (const HistoryPoint& h : r.history) {
        history.push_back(json::array({h.evaluation, h.objective}));
    }
    return json{{"best_mapping", to_json(r.best)},
                {"cost", to_json(r.best_cost)},
                {"history", std::move(history)},
                {"evaluations_used", r.evaluations_used},
                {"terminated_by", std::string(to_string(r.terminated_by))}};
}

}  // namespace automapper
