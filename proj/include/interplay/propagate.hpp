#pragma once

#include <optional>
#include <vector>

#include "interplay/compose.hpp"
#include "interplay/rng.hpp"

namespace interplay {

enum class Activation { Relu, Identity };

Activation parse_activation(std::string_view text);
const char* activation_name(Activation a);

// Synthetic linear stack (optional ReLU) for error-transport studies.
// Dense and compressed passes share identical weights and inputs; at a
// compressed layer the weights get the composed transform and the layer's
// input activations are quantized. Master weights are never mutated.
struct StackConfig {
    std::size_t depth = 12;
    std::size_t width = 256;
    std::size_t batch = 8;
    Activation activation = Activation::Relu;
    double weight_std = 0.0;  // <= 0 selects 1/sqrt(width)
    QuantFormat fmt;
    std::optional<SparsityPattern> pat;  // absent: quantization only
    Order order = Order::SThenQ;
    std::optional<std::vector<std::size_t>> compress_layers;  // absent: all
    SeedSpec seed;
};

// trace[i] = ||Yhat_i - Y_i||_2 / ||Y_i||_2 over the batch, one entry per
// layer output.
using PropagationTrace = std::vector<double>;

PropagationTrace simulate_stack(const StackConfig& cfg);

}  // namespace interplay
