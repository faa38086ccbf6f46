#pragma once

#include <cstdint>
#include <random>

#include "interplay/tensor.hpp"

namespace interplay {

// Identifies one reproducible random stream. Identical (seed, stream) pairs
// produce identical value sequences on one build; parallel work splits by
// stream index instead of sharing generator state.
struct SeedSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    SeedSpec with_stream(std::uint64_t s) const { return {seed, s}; }
};

// Standard-normal stream over a seeded mt19937_64 via an explicit
// Box-Muller transform, so the sequence is fixed by this code alone and
// not by the standard library's normal_distribution internals.
class GaussianStream {
public:
    explicit GaussianStream(SeedSpec spec);

    double next();
    void fill(std::span<double> out);

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

Block gaussian_block(std::size_t n, SeedSpec seed);

// Blocks are generated from consecutive streams starting at seed.stream,
// one stream per block, so block contents are stable under re-partitioning
// of the work across threads.
Tensor gaussian_tensor(std::vector<std::size_t> shape, std::size_t block_size,
                       SeedSpec seed);

}  // namespace interplay
