#include "interplay/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace interplay {

Activation parse_activation(std::string_view text) {
    if (text == "relu") return Activation::Relu;
    if (text == "identity") return Activation::Identity;
    throw std::invalid_argument("activation: expected 'relu' or 'identity'");
}

const char* activation_name(Activation a) {
    return a == Activation::Relu ? "relu" : "identity";
}

namespace {

// out[b,j] = sum_k in[b,k] * w[k,j]; all row-major.
void matmul(std::span<const double> in, std::span<const double> w,
            std::span<double> out, std::size_t batch, std::size_t d) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* in_row = in.data() + b * d;
        double* out_row = out.data() + b * d;
        for (std::size_t k = 0; k < d; ++k) {
            const double v = in_row[k];
            const double* w_row = w.data() + k * d;
            for (std::size_t j = 0; j < d; ++j) out_row[j] += v * w_row[j];
        }
    }
}

void apply_activation(std::span<double> y, Activation a) {
    if (a == Activation::Relu)
        for (double& v : y) v = v > 0 ? v : 0.0;
}

double rel_l2(std::span<const double> approx, std::span<const double> exact) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const double d = approx[i] - exact[i];
        num += d * d;
        den += exact[i] * exact[i];
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

Tensor as_tensor(std::vector<double> data, std::size_t rows, std::size_t cols,
                 std::size_t block_size) {
    Tensor t;
    t.shape = {rows, cols};
    t.data = std::move(data);
    t.block_size = block_size;
    return t;
}

}  // namespace

PropagationTrace simulate_stack(const StackConfig& cfg) {
    if (cfg.depth == 0) throw std::invalid_argument("depth: must be positive");
    if (cfg.width == 0) throw std::invalid_argument("width: must be positive");
    if (cfg.batch == 0) throw std::invalid_argument("batch: must be positive");
    const std::size_t d = cfg.width;
    if (d % cfg.fmt.block_size != 0)
        throw std::invalid_argument("width: must be divisible by block_size");

    std::vector<bool> compressed(cfg.depth, true);
    if (cfg.compress_layers) {
        compressed.assign(cfg.depth, false);
        for (std::size_t idx : *cfg.compress_layers) {
            if (idx >= cfg.depth)
                throw std::invalid_argument("compress_layers: index out of range");
            compressed[idx] = true;
        }
    }

    const double wstd =
        cfg.weight_std > 0 ? cfg.weight_std : 1.0 / std::sqrt(static_cast<double>(d));

    // Stream 0 is the input batch, stream 1+i is layer i's weights.
    std::vector<double> input(cfg.batch * d);
    GaussianStream gin(cfg.seed.with_stream(cfg.seed.stream));
    gin.fill(input);

    std::vector<std::vector<double>> weights(cfg.depth);
    for (std::size_t l = 0; l < cfg.depth; ++l) {
        weights[l].resize(d * d);
        GaussianStream gw(cfg.seed.with_stream(cfg.seed.stream + 1 + l));
        gw.fill(weights[l]);
        for (double& v : weights[l]) v *= wstd;
    }

    // Compressed weights are derived from the same masters, zero-shot.
    std::vector<std::vector<double>> cweights(cfg.depth);
    for (std::size_t l = 0; l < cfg.depth; ++l) {
        if (!compressed[l]) continue;
        Tensor wt = as_tensor(weights[l], d, d, cfg.fmt.block_size);
        Tensor out = cfg.pat ? compose_tensor(wt, cfg.fmt, *cfg.pat, cfg.order)
                             : quantize_tensor(wt, cfg.fmt);
        cweights[l] = std::move(out.data);
    }

    std::vector<double> y_dense = input;
    std::vector<double> y_comp = input;
    std::vector<double> scratch(cfg.batch * d);
    PropagationTrace trace(cfg.depth, 0.0);

    for (std::size_t l = 0; l < cfg.depth; ++l) {
        matmul(y_dense, weights[l], scratch, cfg.batch, d);
        apply_activation(scratch, cfg.activation);
        std::swap(y_dense, scratch);

        const std::vector<double>* w = &weights[l];
        std::vector<double> acts;
        const std::vector<double>* in = &y_comp;
        if (compressed[l]) {
            Tensor at = as_tensor(y_comp, cfg.batch, d, cfg.fmt.block_size);
            acts = quantize_tensor(at, cfg.fmt).data;
            in = &acts;
            w = &cweights[l];
        }
        matmul(*in, *w, scratch, cfg.batch, d);
        apply_activation(scratch, cfg.activation);
        std::swap(y_comp, scratch);

        trace[l] = rel_l2(y_comp, y_dense);
    }
    return trace;
}

}  // namespace interplay
