#include "automapper/mapping.hpp"

#include "automapper/errors.hpp"
#include "json_util.hpp"

namespace automapper {

using detail::json;

bool is_permutation(const LoopOrder& order) noexcept {
    std::array<bool, kNumDims> seen{};
    for (LoopDim d : order) {
        if (index(d) >= kNumDims || seen[index(d)]) {
            return false;
        }
        seen[index(d)] = true;
    }
    return true;
}

std::int64_t LayerMapping::tiled_extent(LoopDim d) const noexcept {
    return at(Level::RF).size(d) * spatial.factor(d) * at(Level::GB).size(d) *
           at(Level::DRAM).size(d);
}

LayerMapping minimal_tile_mapping(const ConvLayerShape& layer) {
    LayerMapping m;
    for (LoopDim d : kAllDims) {
        m.at(Level::DRAM).size(d) = layer.extent(d);
    }
    return m;
}

namespace {

json level_to_json(const LevelMapping& lm) {
    json order = json::array();
    for (LoopDim d : lm.order) {
        order.push_back(std::string(to_string(d)));
    }
    json sizes = json::object();
    for (LoopDim d : kAllDims) {
        sizes[std::string(to_string(d))] = lm.size(d);
    }
    return json{{"order", std::move(order)}, {"sizes", std::move(sizes)}};
}

LoopDim parse_dim_field(const json& j, const std::string& field) {
    std::string name = detail::as_string(j, field);
    auto d = parse_dim(name);
    if (!d) {
        throw SchemaError(field, "unknown loop dimension '" + name + "'");
    }
    return *d;
}

LevelMapping level_from_json(const json& j, const std::string& field) {
    detail::require_object(j, field);
    detail::reject_unknown_keys(j, {"order", "sizes"}, field);
    LevelMapping lm;

    const std::string order_field = field + ".order";
    const json& order = detail::require_key(j, "order", field);
    detail::require_array(order, order_field);
    if (order.size() != kNumDims) {
        throw SchemaError(order_field, "must list all six dimensions");
    }
    for (std::size_t i = 0; i < kNumDims; ++i) {
        lm.order[i] = parse_dim_field(order[i], order_field + "[" + std::to_string(i) + "]");
    }
    if (!is_permutation(lm.order)) {
        throw SchemaError(order_field, "must contain each dimension exactly once");
    }

    const std::string sizes_field = field + ".sizes";
    const json& sizes = detail::require_key(j, "sizes", field);
    detail::require_object(sizes, sizes_field);
    detail::reject_unknown_keys(sizes, {"K", "C", "X", "Y", "R", "S"}, sizes_field);
    for (LoopDim d : kAllDims) {
        lm.size(d) = detail::as_int(detail::require_key(sizes, to_string(d), sizes_field),
                                    sizes_field + "." + std::string(to_string(d)), 1);
    }
    return lm;
}

}  // namespace

json to_json(const LayerMapping& m) {
    json j;
    for (Level l : kAllLevels) {
        j[std::string(to_string(l))] = level_to_json(m.at(l));
    }
    j["spatial"] = json{{"dim_row", std::string(to_string(m.spatial.dim_row))},
                        {"dim_col", std::string(to_string(m.spatial.dim_col))},
                        {"size_row", m.spatial.size_row},
                        {"size_col", m.spatial.size_col}};
    return j;
}

json to_json(const NetworkMapping& nm) {
    json layers = json::array();
    for (const auto& m : nm.per_layer) {
        layers.push_back(to_json(m));
    }
    return json{{"layers", std::move(layers)}, {"pipeline", nm.pipeline}};
}

LayerMapping parse_layer_mapping(const json& j, const std::string& field) {
    detail::require_object(j, field);
    detail::reject_unknown_keys(j, {"RF", "GB", "DRAM", "spatial"}, field);
    LayerMapping m;
    for (Level l : kAllLevels) {
        m.at(l) = level_from_json(detail::require_key(j, to_string(l), field),
                                  detail::join_path(field, to_string(l)));
    }
    const std::string sp_field = detail::join_path(field, "spatial");
    const json& sp = detail::require_key(j, "spatial", field);
    detail::require_object(sp, sp_field);
    detail::reject_unknown_keys(sp, {"dim_row", "dim_col", "size_row", "size_col"}, sp_field);
    m.spatial.dim_row = parse_dim_field(detail::require_key(sp, "dim_row", sp_field), sp_field + ".dim_row");
    m.spatial.dim_col = parse_dim_field(detail::require_key(sp, "dim_col", sp_field), sp_field + ".dim_col");
    if (m.spatial.dim_row == m.spatial.dim_col) {
        throw SchemaError(sp_field, "dim_row and dim_col must differ");
    }
    m.spatial.size_row = detail::as_int(detail::require_key(sp, "size_row", sp_field), sp_field + ".size_row", 1);
    m.spatial.size_col = detail::as_int(detail::require_key(sp, "size_col", sp_field), sp_field + ".size_col", 1);
    return m;
}

NetworkMapping parse_network_mapping(const json& j) {
    detail::require_object(j, "");
    detail::reject_unknown_keys(j, {"layers", "pipeline"}, "");
    NetworkMapping nm;
    nm.pipeline = detail::as_bool(detail::require_key(j, "pipeline", ""), "pipeline");
    const json& layers = detail::require_key(j, "layers", "");
    detail::require_array(layers, "layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        nm.per_layer.push_back(parse_layer_mapping(layers[i], "layers[" + std::to_string(i) + "]"));
    }
    return nm;
}

NetworkMapping load_network_mapping(const std::string& path) {
    return parse_network_mapping(detail::read_json_file(path));
}

std::string canonical_string(const LayerMapping& m) { return to_json(m).dump(); }

std::string canonical_string(const NetworkMapping& nm) { return to_json(nm).dump(); }

}  // namespace automapper
