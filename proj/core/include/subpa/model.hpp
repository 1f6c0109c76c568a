#pragma once

#include <string>

#include "subpa/weight_function.hpp"

namespace subpa {

// Two growth schemes share one count process:
//   graph: each step adds one edge; with probability p it connects a new
//          vertex to a weighted pick, otherwise two independent weighted
//          picks (possibly the same vertex, forming a loop).
//   urn:   with probability p a new one-ball urn appears, otherwise a
//          weighted pick receives one ball.
enum class ModelKind { graph, urn };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Validated model parameters.  The derived pair (p0, q0) is
// (p, 2-p) for the graph scheme and (p, 1-p) for the urn scheme.
struct ModelParams {
    ModelKind kind;
    double p;
    double p0;
    double q0;
    WeightFunction weight;

    static ModelParams graph(double p, WeightFunction w);  // 0 < p <= 1
    static ModelParams urn(double p, WeightFunction w);    // 0 < p < 1
    static ModelParams make(ModelKind kind, double p, WeightFunction w);
};

}  // namespace subpa
