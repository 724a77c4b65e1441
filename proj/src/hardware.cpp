#include "automapper/hardware.hpp"

#include "automapper/errors.hpp"
#include "json_util.hpp"

namespace automapper {

using detail::json;

std::string_view to_string(Level l) noexcept {
    switch (l) {
        case Level::RF: return "RF";
        case Level::GB: return "GB";
        case Level::DRAM: return "DRAM";
    }
    return "?";
}

HardwareSpec default_hardware() {
    HardwareSpec hw;
    hw.name = "default";
    hw.ref_bits = 16;
    hw.levels[index(Level::RF)] = MemLevel{"RF", 4096, 1.0, std::nullopt};
    hw.levels[index(Level::GB)] = MemLevel{"GB", 108 * 1024 * 8, 6.0, 1024};
    hw.levels[index(Level::DRAM)] = MemLevel{"DRAM", std::nullopt, 200.0, 64};
    hw.array = PEArray{30, 30, 1.0, 2.0};
    return hw;
}

void check_hardware(const HardwareSpec& hw) {
    if (hw.ref_bits < 1) {
        throw SchemaError("ref_bits", "must be >= 1");
    }
    for (Level l : kAllLevels) {
        const MemLevel& m = hw.level(l);
        const std::string field = "levels[" + std::to_string(index(l)) + "]";
        if (m.name != to_string(l)) {
            throw SchemaError(field + ".name", "expected \"" + std::string(to_string(l)) +
                                                   "\" (levels are ordered RF, GB, DRAM)");
        }
        if (l == Level::DRAM) {
            if (m.capacity_bits) {
                throw SchemaError(field + ".capacity_bits", "DRAM capacity must be null (unbounded)");
            }
        } else if (!m.capacity_bits) {
            throw SchemaError(field + ".capacity_bits", "required for on-chip levels");
        } else if (*m.capacity_bits < hw.ref_bits) {
            throw SchemaError(field + ".capacity_bits", "must hold at least one reference word");
        }
        if (!(m.energy_per_word >= 0.0)) {
            throw SchemaError(field + ".energy_per_word", "must be >= 0");
        }
        if (m.bandwidth_bits_per_cycle && *m.bandwidth_bits_per_cycle < 1) {
            throw SchemaError(field + ".bandwidth_bits_per_cycle", "must be >= 1 or null");
        }
    }
    if (hw.array.rows < 1) throw SchemaError("pe_array.rows", "must be >= 1");
    if (hw.array.cols < 1) throw SchemaError("pe_array.cols", "must be >= 1");
    if (hw.array.rows > (1 << 20) || hw.array.cols > (1 << 20)) {
        throw SchemaError("pe_array", "array axis above 2^20 is not supported");
    }
    if (!(hw.array.mac_energy >= 0.0)) throw SchemaError("pe_array.mac_energy", "must be >= 0");
    if (!(hw.array.noc_energy_per_word >= 0.0)) {
        throw SchemaError("pe_array.noc_energy_per_word", "must be >= 0");
    }
}

HardwareSpec parse_hardware(const json& j) {
    detail::require_object(j, "");
    detail::reject_unknown_keys(j, {"name", "levels", "pe_array", "ref_bits"}, "");

    HardwareSpec hw;
    if (auto it = j.find("name"); it != j.end()) {
        hw.name = detail::as_string(*it, "name");
    }
    std::int64_t ref_bits = detail::as_int(detail::require_key(j, "ref_bits", ""), "ref_bits", 1);
    if (ref_bits > 4096) {
        throw SchemaError("ref_bits", "reference width above 4096 is not supported");
    }
    hw.ref_bits = static_cast<int>(ref_bits);

    const json& levels = detail::require_key(j, "levels", "");
    detail::require_array(levels, "levels");
    if (levels.size() != kNumLevels) {
        throw SchemaError("levels", "expected exactly three levels ordered RF, GB, DRAM");
    }
    for (std::size_t i = 0; i < kNumLevels; ++i) {
        const std::string prefix = "levels[" + std::to_string(i) + "]";
        const json& lj = levels[i];
        detail::require_object(lj, prefix);
        detail::reject_unknown_keys(
            lj, {"name", "capacity_bits", "energy_per_word", "bandwidth_bits_per_cycle"}, prefix);
        MemLevel m;
        m.name = detail::as_string(detail::require_key(lj, "name", prefix), prefix + ".name");
        m.capacity_bits = detail::optional_int(lj, "capacity_bits", prefix, 0);
        m.energy_per_word = detail::as_number(detail::require_key(lj, "energy_per_word", prefix),
                                              prefix + ".energy_per_word");
        m.bandwidth_bits_per_cycle = detail::optional_int(lj, "bandwidth_bits_per_cycle", prefix, 1);
        hw.levels[i] = std::move(m);
    }

    const json& pe = detail::require_key(j, "pe_array", "");
    detail::require_object(pe, "pe_array");
    detail::reject_unknown_keys(pe, {"rows", "cols", "mac_energy", "noc_energy_per_word"}, "pe_array");
    hw.array.rows = detail::as_int(detail::require_key(pe, "rows", "pe_array"), "pe_array.rows", 1);
    hw.array.cols = detail::as_int(detail::require_key(pe, "cols", "pe_array"), "pe_array.cols", 1);
    hw.array.mac_energy = detail::as_number(detail::require_key(pe, "mac_energy", "pe_array"),
                                            "pe_array.mac_energy");
    hw.array.noc_energy_per_word = detail::as_number(
        detail::require_key(pe, "noc_energy_per_word", "pe_array"), "pe_array.noc_energy_per_word");

    check_hardware(hw);
    return hw;
}

HardwareSpec load_hardware(const std::filesystem::path& path) {
    json j = detail::read_json_file(path);
    HardwareSpec hw = parse_hardware(j);
    if (j.is_object() && !j.contains("name")) {
        hw.name = path.stem().string();
    }
    return hw;
}

json to_json(const HardwareSpec& hw) {
    json levels = json::array();
    for (const MemLevel& m : hw.levels) {
        json lj;
        lj["name"] = m.name;
        lj["capacity_bits"] = m.capacity_bits ? json(*m.capacity_bits) : json(nullptr);
        lj["energy_per_word"] = m.energy_per_word;
        lj["bandwidth_bits_per_cycle"] =
            m.bandwidth_bits_per_cycle ? json(*m.bandwidth_bits_per_cycle) : json(nullptr);
        levels.push_back(std::move(lj));
    }
    return json{{"name", hw.name},
                {"levels", std::move(levels)},
                {"pe_array",
                 {{"rows", hw.array.rows},
                  {"cols", hw.array.cols},
                  {"mac_energy", hw.array.mac_energy},
                  {"noc_energy_per_word", hw.array.noc_energy_per_word}}},
                {"ref_bits", hw.ref_bits}};
}

}  // namespace automapper
