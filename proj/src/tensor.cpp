#include "interplay/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace interplay {

std::size_t Tensor::block_count(bool allow_ragged) const {
    if (block_size == 0) throw std::invalid_argument("block_size: must be positive");
    if (!allow_ragged && data.size() % block_size != 0)
        throw std::invalid_argument("block_size: does not divide tensor length");
    return (data.size() + block_size - 1) / block_size;
}

std::span<const double> Tensor::block(std::size_t i) const {
    const std::size_t begin = i * block_size;
    const std::size_t len = std::min(block_size, data.size() - begin);
    return {data.data() + begin, len};
}

std::span<double> Tensor::block(std::size_t i) {
    const std::size_t begin = i * block_size;
    const std::size_t len = std::min(block_size, data.size() - begin);
    return {data.data() + begin, len};
}

void Tensor::validate(bool allow_ragged) const {
    if (shape.empty()) throw std::invalid_argument("shape: must be non-empty");
    std::size_t total = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw std::invalid_argument("shape: zero dimension");
        total *= d;
    }
    if (total != data.size())
        throw std::invalid_argument("data: length does not match shape product");
    (void)block_count(allow_ragged);
}

Tensor make_tensor(std::vector<std::size_t> shape, std::vector<double> data,
                   std::size_t block_size) {
    Tensor t{std::move(shape), std::move(data), block_size};
    t.validate(true);
    return t;
}

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string(what) + ": non-finite element");
    }
}

double lp_norm(std::span<const double> v, NormKind k) {
    if (v.empty()) throw std::invalid_argument("v: empty vector");
    if (!(k.p >= 1.0) || !std::isfinite(k.p))
        throw std::invalid_argument("p: must be a finite real >= 1");
    require_finite(v, "v");
    if (k.p == 1.0) {
        double acc = 0;
        for (double x : v) acc += std::fabs(x);
        return acc;
    }
    if (k.p == 2.0) {
        double acc = 0;
        for (double x : v) acc += x * x;
        return std::sqrt(acc);
    }
    double acc = 0;
    for (double x : v) acc += std::pow(std::fabs(x), k.p);
    return std::pow(acc, 1.0 / k.p);
}

}  // namespace interplay
