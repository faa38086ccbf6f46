#include "interplay/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace interplay {

namespace {

// murmur3 finalizer
std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

std::uint64_t stream_key(SeedSpec spec) {
    return mix64(mix64(spec.seed + 0x9e3779b97f4a7c15ULL) ^
                 mix64(spec.stream * 0xbf58476d1ce4e5b9ULL + 1));
}

}  // namespace

GaussianStream::GaussianStream(SeedSpec spec) : eng_(stream_key(spec)) {}

double GaussianStream::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // u1 in (0,1], u2 in [0,1)
    const double u1 = 1.0 - (eng_() >> 11) * 0x1.0p-53;
    const double u2 = (eng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

void GaussianStream::fill(std::span<double> out) {
    for (double& x : out) x = next();
}

Block gaussian_block(std::size_t n, SeedSpec seed) {
    if (n == 0) throw std::invalid_argument("n: must be positive");
    Block b(n);
    GaussianStream g(seed);
    g.fill(b);
    return b;
}

Tensor gaussian_tensor(std::vector<std::size_t> shape, std::size_t block_size,
                       SeedSpec seed) {
    std::size_t total = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw std::invalid_argument("shape: zero dimension");
        total *= d;
    }
    Tensor t;
    t.shape = std::move(shape);
    t.block_size = block_size;
    t.data.resize(total);
    const std::size_t blocks = t.block_count(true);
    for (std::size_t i = 0; i < blocks; ++i) {
        GaussianStream g(seed.with_stream(seed.stream + i));
        g.fill(t.block(i));
    }
    return t;
}

}  // namespace interplay
