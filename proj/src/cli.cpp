#include "automapper/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "automapper/costmodel.hpp"
#include "automapper/errors.hpp"
#include "automapper/hardware.hpp"
#include "automapper/mapspace.hpp"
#include "automapper/oracle.hpp"
#include "automapper/search.hpp"
#include "automapper/workload.hpp"

namespace automapper {

using nlohmann::json;

namespace {

// Raised inside a subcommand to leave with a specific status.
struct Exit {
    int status;
};

struct SearchFlags {
    std::string workload;
    std::string hw;
    std::optional<int> bitwidth;
    std::optional<std::uint64_t> budget;
    std::uint64_t seed = 0;
    std::optional<double> target_edp;
    std::string objective = "edp";
    std::string pipeline = "auto";
    std::string out;
    unsigned jobs = 1;
    std::size_t population = 1000;
};

struct EvalFlags {
    std::string workload;
    std::string hw;
    std::string mapping;
    std::optional<int> bitwidth;
    bool oracle = false;
    std::string out;
};

struct SpaceFlags {
    std::string workload;
};

Network load_net(const std::string& path, std::ostream& err) {
    try {
        return load_workload(path);
    } catch (const Error& e) {
        err << "error: workload " << path << ": " << e.what() << "\n";
        throw Exit{kExitBadInput};
    }
}

HardwareSpec load_hw(const std::string& path, std::ostream& err) {
    try {
        return load_hardware(path);
    } catch (const Error& e) {
        err << "error: hardware " << path << ": " << e.what() << "\n";
        throw Exit{kExitBadInput};
    }
}

std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

void write_json(const std::string& path, const json& j, std::ostream& err) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        err << "error: cannot write " << path << "\n";
        throw Exit{kExitBadInput};
    }
    f << j.dump(2) << "\n";
}

std::uint64_t simulation_cap() {
    if (const char* env = std::getenv("AUTOMAPPER_SIM_CAP")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return v;
        }
    }
    return kDefaultSimulationCap;
}

PipelineChoice parse_pipeline(const std::string& s) {
    if (s == "on") return PipelineChoice::On;
    if (s == "off") return PipelineChoice::Off;
    return PipelineChoice::Searched;
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

int cmd_search(const SearchFlags& flags, std::ostream& out, std::ostream& err) {
    Network net = load_net(flags.workload, err);
    const HardwareSpec hw = load_hw(flags.hw, err);
    if (flags.bitwidth) {
        if (*flags.bitwidth < 1) {
            err << "error: --bitwidth must be >= 1\n";
            return kExitBadInput;
        }
        net.bitwidths = {*flags.bitwidth};
    }

    const std::size_t features = feature_count(net.layers.size());
    SearchConfig cfg = scaled_search_config(flags.population, features);
    if (flags.budget) cfg.budget = *flags.budget;
    cfg.seed = flags.seed;
    cfg.target = flags.target_edp;
    cfg.objective = *parse_objective(flags.objective);
    cfg.space.pipeline = parse_pipeline(flags.pipeline);
    cfg.jobs = flags.jobs;
    try {
        cfg.check(features);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadInput;
    }

    json entries = json::array();
    json wall = json::object();
    bool infeasible = false;

    out << std::left << std::setw(6) << "bits" << std::setw(16) << "EDP" << std::setw(16)
        << "energy" << std::setw(14) << "cycles" << std::setw(10) << "pipeline"
        << "status\n";

    for (std::size_t i = 0; i < net.bitwidths.size(); ++i) {
        // One width at a time so wall time can be attributed per entry.
        Network single = net;
        single.bitwidths = {net.bitwidths[i]};
        SearchConfig local = cfg;
        local.seed = cfg.seed + i;
        const auto start = std::chrono::steady_clock::now();
        auto outcomes = search_per_bitwidth(single, hw, local);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        BitwidthOutcome& o = outcomes.begin()->second;
        const int bits = net.bitwidths[i];
        wall[std::to_string(bits)] = seconds;

        json entry{{"bits", bits}};
        out << std::setw(6) << bits;
        if (o.ok()) {
            const SearchResult& r = *o.result;
            entry["status"] = "ok";
            entry.update(to_json(r));
            out << std::setw(16) << format_number(r.best_cost.total.edp) << std::setw(16)
                << format_number(r.best_cost.total.total_energy) << std::setw(14)
                << r.best_cost.total.cycles << std::setw(10) << (r.best.pipeline ? "on" : "off")
                << to_string(r.terminated_by) << "\n";
        } else {
            entry["status"] = "failed";
            entry["error"] = o.error;
            infeasible = true;
            out << std::setw(16) << "-" << std::setw(16) << "-" << std::setw(14) << "-"
                << std::setw(10) << "-" << "failed: " << o.error << "\n";
            err << "error: bit-width " << bits << ": " << o.error << "\n";
        }
        entries.push_back(std::move(entry));
    }

    // Shared-mapping column: the 32-bit winner re-evaluated at every width.
    for (std::size_t i = 0; i < net.bitwidths.size(); ++i) {
        if (net.bitwidths[i] != 32 || entries[i]["status"] != "ok") continue;
        const NetworkMapping shared = parse_network_mapping(entries[i]["best_mapping"]);
        for (std::size_t j = 0; j < net.bitwidths.size(); ++j) {
            const int bits = net.bitwidths[j];
            if (validate_network(shared, net, hw, bits)) {
                entries[j]["shared_mapping_cost"] = nullptr;
            } else {
                entries[j]["shared_mapping_cost"] = to_json(evaluate_network(shared, net, hw, bits));
            }
        }
    }

    json report{
        {"report",
         {{"tool_version", kToolVersion},
          {"workload", net.name},
          {"hardware", hw.name},
          {"seed", cfg.seed},
          {"objective", std::string(to_string(cfg.objective))},
          {"config",
           {{"n", cfg.n},
            {"m", cfg.m},
            {"k", cfg.k},
            {"budget", cfg.budget},
            {"target", cfg.target ? json(*cfg.target) : json(nullptr)},
            {"pipeline", flags.pipeline}}},
          {"entries", std::move(entries)}}},
        {"telemetry", {{"wall_time_s", std::move(wall)}, {"jobs", cfg.jobs}}}};

    if (!flags.out.empty()) {
        write_json(flags.out, report, err);
    }
    return infeasible ? kExitInfeasible : kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

void print_traffic_row(std::ostream& out, const std::string& label, const TensorTraffic& tt) {
    out << "  " << std::left << std::setw(10) << label;
    for (TensorKind t : kAllTensors) {
        const Traffic& tr = tt[index(t)];
        out << std::setw(9) << to_string(t) << "r=" << std::setw(12) << tr.reads << "w="
            << std::setw(12) << tr.writes;
    }
    out << "\n";
}

void print_counts(std::ostream& out, const AccessCounts& ac) {
    print_traffic_row(out, "DRAM<->GB", ac.dram_gb);
    print_traffic_row(out, "GB side", ac.gb_side);
    print_traffic_row(out, "RF side", ac.rf_side);
    out << "  macs=" << ac.macs << " rf_operand_accesses=" << ac.rf_operand_accesses << "\n";
}

void print_cost(std::ostream& out, const CostReport& r) {
    out << "  cycles=" << r.cycles << " energy=" << format_number(r.total_energy)
        << " edp=" << format_number(r.edp) << "\n  energy by component:";
    for (Component c : kAllComponents) {
        out << " " << to_string(c) << "=" << format_number(r.energy(c));
    }
    out << "\n";
}

int cmd_eval(const EvalFlags& flags, std::ostream& out, std::ostream& err) {
    const Network net = load_net(flags.workload, err);
    const HardwareSpec hw = load_hw(flags.hw, err);
    NetworkMapping nm;
    try {
        nm = load_network_mapping(flags.mapping);
    } catch (const Error& e) {
        err << "error: mapping " << flags.mapping << ": " << e.what() << "\n";
        return kExitBadInput;
    }
    const int bits = flags.bitwidth.value_or(net.bitwidths.front());
    if (bits < 1) {
        err << "error: --bitwidth must be >= 1\n";
        return kExitBadInput;
    }

    if (auto rejection = validate_network(nm, net, hw, bits)) {
        err << "rejected: " << rejection->describe() << "\n";
        out << "rejected: " << rejection->describe() << "\n";
        return kExitRejected;
    }

    const NetworkCost cost = evaluate_network(nm, net, hw, bits);
    out << "workload " << net.name << " on " << hw.name << " at " << bits << " bits, "
        << (nm.pipeline ? "pipeline" : "multi-cycle") << "\n";
    out << "total\n";
    print_cost(out, cost.total);
    print_counts(out, cost.total.access_counts);
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        out << "layer " << net.layers[i].name << "\n";
        print_cost(out, cost.layers[i]);
        print_counts(out, cost.layers[i].access_counts);
    }

    json oracle_json = json::array();
    if (flags.oracle) {
        const std::uint64_t cap = simulation_cap();
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            const AccessCounts analytic = access_counts(nm.per_layer[i], net.layers[i]);
            AccessCounts simulated;
            try {
                simulated = oracle_simulate(nm.per_layer[i], net.layers[i], cap);
            } catch (const SimulationTooLarge& e) {
                err << "error: layer " << net.layers[i].name << ": " << e.what() << "\n";
                return kExitBadInput;
            }
            const bool equal = analytic == simulated;
            out << "oracle layer " << net.layers[i].name << ": " << (equal ? "match" : "MISMATCH") << "\n";
            out << " analytical\n";
            print_counts(out, analytic);
            out << " simulated\n";
            print_counts(out, simulated);
            oracle_json.push_back(json{{"layer", net.layers[i].name},
                                       {"analytical", to_json(analytic)},
                                       {"simulated", to_json(simulated)},
                                       {"equal", equal}});
        }
    }

    if (!flags.out.empty()) {
        json j{{"bits", bits}, {"cost", to_json(cost)}};
        if (flags.oracle) j["oracle"] = std::move(oracle_json);
        write_json(flags.out, j, err);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// space-size
// ---------------------------------------------------------------------------

int cmd_space_size(const SpaceFlags& flags, std::ostream& out, std::ostream& err) {
    const Network net = load_net(flags.workload, err);
    out << std::left << std::setw(16) << "layer" << std::setw(10) << "log10" << "size\n";
    for (const auto& layer : net.layers) {
        const BigInt size = space_size(layer);
        out << std::setw(16) << layer.name << std::setw(10) << std::fixed << std::setprecision(3)
            << log10_big(size) << size.str() << "\n";
    }
    const BigInt total = network_space_size(net);
    out << std::setw(16) << "total" << std::setw(10) << std::fixed << std::setprecision(3)
        << log10_big(total) << total.str() << "\n";
    return kExitOk;
}

}  // namespace

nlohmann::json deterministic_section(const nlohmann::json& report) {
    return report.at("report");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Searches loop-nest dataflow mappings of CNN layers on a spatial accelerator"};
    app.require_subcommand(1);

    SearchFlags sf;
    CLI::App* search = app.add_subcommand("search", "Evolutionary mapping search");
    search->add_option("--workload", sf.workload, "Workload JSON")->required();
    search->add_option("--hw", sf.hw, "Hardware JSON")->required();
    search->add_option("--bitwidth", sf.bitwidth, "Search a single bit-width");
    search->add_option("--budget", sf.budget, "Evaluation budget per bit-width (default 20 x population)");
    search->add_option("--seed", sf.seed, "RNG seed");
    search->add_option("--target-edp", sf.target_edp, "Stop once the objective reaches this value");
    search->add_option("--objective", sf.objective, "edp | energy | latency")
        ->check(CLI::IsMember({"edp", "energy", "latency"}));
    search->add_option("--pipeline", sf.pipeline, "auto | on | off")
        ->check(CLI::IsMember({"auto", "on", "off"}));
    search->add_option("--out", sf.out, "Write the JSON report here");
    search->add_option("--jobs", sf.jobs, "Evaluation threads")->check(CLI::Range(1u, 1024u));
    search->add_option("--population", sf.population, "Population size n")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 24));

    EvalFlags ef;
    CLI::App* eval = app.add_subcommand("eval", "Validate and evaluate a mapping file");
    eval->add_option("--workload", ef.workload, "Workload JSON")->required();
    eval->add_option("--hw", ef.hw, "Hardware JSON")->required();
    eval->add_option("--mapping", ef.mapping, "Network mapping JSON")->required();
    eval->add_option("--bitwidth", ef.bitwidth, "Bit-width (default: first workload bit-width)");
    eval->add_flag("--oracle", ef.oracle, "Cross-check access counts by loop simulation");
    eval->add_option("--out", ef.out, "Write the cost report as JSON");

    SpaceFlags pf;
    CLI::App* space = app.add_subcommand("space-size", "Count raw mapping choices");
    space->add_option("--workload", pf.workload, "Workload JSON")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitBadInput;
    }

    try {
        if (search->parsed()) return cmd_search(sf, out, err);
        if (eval->parsed()) return cmd_eval(ef, out, err);
        if (space->parsed()) return cmd_space_size(pf, out, err);
    } catch (const Exit& e) {
        return e.status;
    } catch (const InfeasibleLayer& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const SamplingExhausted& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const InvalidMapping& e) {
        err << "rejected: " << e.what() << "\n";
        return kExitRejected;
    } catch (const PipelineInfeasible& e) {
        err << "rejected: " << e.what() << "\n";
        return kExitRejected;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return kExitBadInput;
}

}  // namespace automapper
