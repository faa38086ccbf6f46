#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace interplay {

// A block is the unit of max-scaled quantization and N:M grouping.
using Block = std::vector<double>;

// Lp norm selector, p in [1, +inf). p = inf is deliberately unsupported.
struct NormKind {
    double p = 2.0;
};

// Row-major tensor partitioned into fixed-length blocks.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::size_t block_size = 64;

    std::size_t size() const { return data.size(); }

    // Number of blocks. By default the block size must divide the data
    // length exactly; pass allow_ragged to permit a short final block.
    std::size_t block_count(bool allow_ragged = false) const;
    std::span<const double> block(std::size_t i) const;
    std::span<double> block(std::size_t i);

    // Throws std::invalid_argument naming the offending field.
    void validate(bool allow_ragged = false) const;
};

Tensor make_tensor(std::vector<std::size_t> shape, std::vector<double> data,
                   std::size_t block_size);

// Throws if any element is NaN/Inf; `what` names the argument in the message.
void require_finite(std::span<const double> v, const char* what);

// (sum |v_i|^p)^(1/p). Rejects empty input and p < 1.
double lp_norm(std::span<const double> v, NormKind k);

}  // namespace interplay
