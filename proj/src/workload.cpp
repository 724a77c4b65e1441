#include "automapper/workload.hpp"

#include "automapper/errors.hpp"
#include "json_util.hpp"

namespace automapper {

using detail::json;

std::string_view to_string(LoopDim d) noexcept {
    switch (d) {
        case LoopDim::K: return "K";
        case LoopDim::C: return "C";
        case LoopDim::X: return "X";
        case LoopDim::Y: return "Y";
        case LoopDim::R: return "R";
        case LoopDim::S: return "S";
    }
    return "?";
}

std::optional<LoopDim> parse_dim(std::string_view name) noexcept {
    for (LoopDim d : kAllDims) {
        if (to_string(d) == name) {
            return d;
        }
    }
    return std::nullopt;
}

std::int64_t ConvLayerShape::extent(LoopDim d) const noexcept {
    switch (d) {
        case LoopDim::K: return K;
        case LoopDim::C: return C;
        case LoopDim::X: return X;
        case LoopDim::Y: return Y;
        case LoopDim::R: return R;
        case LoopDim::S: return S;
    }
    return 0;
}

ConvLayerShape fully_connected(std::string name, std::int64_t outputs, std::int64_t inputs) {
    return ConvLayerShape{std::move(name), outputs, inputs, 1, 1, 1, 1, 1};
}

std::int64_t total_macs(const ConvLayerShape& layer) noexcept {
    return layer.K * layer.C * layer.X * layer.Y * layer.R * layer.S;
}

void check_layer(const ConvLayerShape& layer, const std::string& field_prefix) {
    std::int64_t product = 1;
    for (LoopDim d : kAllDims) {
        std::int64_t v = layer.extent(d);
        if (v < 1) {
            throw SchemaError(detail::join_path(field_prefix, to_string(d)), "must be >= 1");
        }
        if (v > kMaxExtent) {
            throw SchemaError(detail::join_path(field_prefix, to_string(d)), "must be <= 2^31 - 1");
        }
        if (__builtin_mul_overflow(product, v, &product)) {
            throw SchemaError(field_prefix, "MAC count overflows 64-bit range");
        }
    }
    if (layer.stride < 1 || layer.stride > kMaxExtent) {
        throw SchemaError(detail::join_path(field_prefix, "stride"), "must be in [1, 2^31 - 1]");
    }
}

void check_network(const Network& net) {
    if (net.layers.empty()) {
        throw SchemaError("layers", "must be non-empty");
    }
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        check_layer(net.layers[i], "layers[" + std::to_string(i) + "]");
    }
    if (net.bitwidths.empty()) {
        throw SchemaError("bitwidths", "must be non-empty");
    }
    for (std::size_t i = 0; i < net.bitwidths.size(); ++i) {
        const std::string field = "bitwidths[" + std::to_string(i) + "]";
        if (net.bitwidths[i] < 1) {
            throw SchemaError(field, "must be >= 1");
        }
        if (i > 0 && net.bitwidths[i] <= net.bitwidths[i - 1]) {
            throw SchemaError(field, "bitwidths must be strictly increasing");
        }
    }
}

Network parse_workload(const json& j) {
    detail::require_object(j, "");
    detail::reject_unknown_keys(j, {"name", "layers", "bitwidths"}, "");

    Network net;
    net.name = detail::as_string(detail::require_key(j, "name", ""), "name");

    const json& layers = detail::require_key(j, "layers", "");
    detail::require_array(layers, "layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string prefix = "layers[" + std::to_string(i) + "]";
        const json& lj = layers[i];
        detail::require_object(lj, prefix);
        detail::reject_unknown_keys(lj, {"name", "K", "C", "X", "Y", "R", "S", "stride"}, prefix);
        ConvLayerShape layer;
        layer.name = detail::as_string(detail::require_key(lj, "name", prefix),
                                       detail::join_path(prefix, "name"));
        auto dim = [&](std::string_view key) {
            return detail::as_int(detail::require_key(lj, key, prefix), detail::join_path(prefix, key), 1);
        };
        layer.K = dim("K");
        layer.C = dim("C");
        layer.X = dim("X");
        layer.Y = dim("Y");
        layer.R = dim("R");
        layer.S = dim("S");
        layer.stride = dim("stride");
        net.layers.push_back(std::move(layer));
    }

    const json& bits = detail::require_key(j, "bitwidths", "");
    detail::require_array(bits, "bitwidths");
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const std::string field = "bitwidths[" + std::to_string(i) + "]";
        std::int64_t b = detail::as_int(bits[i], field, 1);
        if (b > 4096) {
            throw SchemaError(field, "bit-width above 4096 is not supported");
        }
        net.bitwidths.push_back(static_cast<int>(b));
    }

    check_network(net);
    return net;
}

Network load_workload(const std::filesystem::path& path) {
    return parse_workload(detail::read_json_file(path));
}

json to_json(const ConvLayerShape& layer) {
    return json{{"name", layer.name}, {"K", layer.K}, {"C", layer.C}, {"X", layer.X},
                {"Y", layer.Y},       {"R", layer.R}, {"S", layer.S}, {"stride", layer.stride}};
}

json to_json(const Network& net) {
    json layers = json::array();
    for (const auto& layer : net.layers) {
        layers.push_back(to_json(layer));
    }
    return json{{"name", net.name}, {"layers", std::move(layers)}, {"bitwidths", net.bitwidths}};
}

}  // namespace automapper
