#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace automapper {

// The six loops of a dense convolution:
//   ofmap[k][y][x] += ifmap[c][y*stride + r][x*stride + s] * kernel[c][k][r][s]
enum class LoopDim : std::uint8_t { K, C, X, Y, R, S };

inline constexpr std::size_t kNumDims = 6;
inline constexpr std::array<LoopDim, kNumDims> kAllDims{LoopDim::K, LoopDim::C, LoopDim::X,
                                                        LoopDim::Y, LoopDim::R, LoopDim::S};

constexpr std::size_t index(LoopDim d) noexcept { return static_cast<std::size_t>(d); }
std::string_view to_string(LoopDim d) noexcept;
std::optional<LoopDim> parse_dim(std::string_view name) noexcept;

struct ConvLayerShape {
    std::string name;
    std::int64_t K = 1;  // output channels
    std::int64_t C = 1;  // input channels
    std::int64_t X = 1;  // output columns
    std::int64_t Y = 1;  // output rows
    std::int64_t R = 1;  // kernel rows
    std::int64_t S = 1;  // kernel columns
    std::int64_t stride = 1;

    std::int64_t extent(LoopDim d) const noexcept;

    bool operator==(const ConvLayerShape&) const = default;
};

// Fully-connected layers use X = Y = R = S = 1.
ConvLayerShape fully_connected(std::string name, std::int64_t outputs, std::int64_t inputs);

struct Network {
    std::string name;
    std::vector<ConvLayerShape> layers;
    std::vector<int> bitwidths;  // strictly increasing

    bool operator==(const Network&) const = default;
};

// Largest accepted loop bound or stride.
inline constexpr std::int64_t kMaxExtent = 2147483647;

std::int64_t total_macs(const ConvLayerShape& layer) noexcept;

// Throws SchemaError naming the offending field.
void check_layer(const ConvLayerShape& layer, const std::string& field_prefix = "layer");
void check_network(const Network& net);

Network parse_workload(const nlohmann::json& j);
Network load_workload(const std::filesystem::path& path);
nlohmann::json to_json(const ConvLayerShape& layer);
nlohmann::json to_json(const Network& net);

}  // namespace automapper
