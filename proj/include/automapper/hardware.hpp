#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace automapper {

// Temporal storage levels, innermost first.
enum class Level : std::uint8_t { RF, GB, DRAM };

inline constexpr std::size_t kNumLevels = 3;
inline constexpr std::array<Level, kNumLevels> kAllLevels{Level::RF, Level::GB, Level::DRAM};

constexpr std::size_t index(Level l) noexcept { return static_cast<std::size_t>(l); }
std::string_view to_string(Level l) noexcept;

struct MemLevel {
    std::string name;
    std::optional<std::int64_t> capacity_bits;             // nullopt = unbounded (DRAM)
    double energy_per_word = 0.0;                           // per ref_bits-wide word
    std::optional<std::int64_t> bandwidth_bits_per_cycle;  // nullopt = unbounded

    bool operator==(const MemLevel&) const = default;
};

struct PEArray {
    std::int64_t rows = 1;
    std::int64_t cols = 1;
    double mac_energy = 1.0;
    double noc_energy_per_word = 0.0;

    std::int64_t total_pes() const noexcept { return rows * cols; }

    bool operator==(const PEArray&) const = default;
};

// RF capacity is per PE; GB capacity is chip-wide.
struct HardwareSpec {
    std::string name = "accelerator";
    std::array<MemLevel, kNumLevels> levels;
    PEArray array;
    int ref_bits = 16;

    const MemLevel& level(Level l) const noexcept { return levels[index(l)]; }
    MemLevel& level(Level l) noexcept { return levels[index(l)]; }

    bool operator==(const HardwareSpec&) const = default;
};

// Eyeriss-style normalized access costs per 16-bit word: MAC=1, RF=1, NoC=2,
// GB=6, DRAM=200. 30x30 PE array.
HardwareSpec default_hardware();

void check_hardware(const HardwareSpec& hw);

HardwareSpec parse_hardware(const nlohmann::json& j);
// The file stem becomes the name unless the document carries "name".
HardwareSpec load_hardware(const std::filesystem::path& path);
nlohmann::json to_json(const HardwareSpec& hw);

}  // namespace automapper
