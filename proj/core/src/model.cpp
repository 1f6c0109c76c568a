#include "subpa/model.hpp"

#include "subpa/errors.hpp"

namespace subpa {

std::string to_string(ModelKind kind) {
    return kind == ModelKind::graph ? "graph" : "urn";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "graph") return ModelKind::graph;
    if (name == "urn") return ModelKind::urn;
    throw ConfigError("model must be 'graph' or 'urn' (got '" + name + "')");
}

ModelParams ModelParams::graph(double p, WeightFunction w) {
    if (!(p > 0.0 && p <= 1.0))
        throw ConfigError("graph model requires 0 < p <= 1 (got p = " +
                          std::to_string(p) + ")");
    return ModelParams{ModelKind::graph, p, p, 2.0 - p, std::move(w)};
}

ModelParams ModelParams::urn(double p, WeightFunction w) {
    if (!(p > 0.0 && p < 1.0))
        throw ConfigError(
            "urn model requires 0 < p < 1; p = " + std::to_string(p) +
            " gives a degenerate evolution");
    return ModelParams{ModelKind::urn, p, p, 1.0 - p, std::move(w)};
}

ModelParams ModelParams::make(ModelKind kind, double p, WeightFunction w) {
    return kind == ModelKind::graph ? graph(p, std::move(w))
                                    : urn(p, std::move(w));
}

}  // namespace subpa
