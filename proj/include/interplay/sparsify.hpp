#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "interplay/tensor.hpp"

namespace interplay {

enum class PatternKind { Nm, Unstructured };

// Deterministic tie handling among equal magnitudes: KeepEarlier treats the
// lower index as larger (and so keeps it); KeepLater the opposite.
enum class TieMode { KeepEarlier, KeepLater };

struct SparsityPattern {
    PatternKind kind = PatternKind::Nm;
    int n = 2;  // kept per group (N:M)
    int m = 4;  // group length (N:M)
    double percent = 0.0;  // unstructured: fraction pruned, in [0, 100]
    TieMode tie = TieMode::KeepEarlier;

    std::string to_string() const;
};

// Accepts "N:M" (e.g. "2:4") and "p%" (e.g. "50%").
SparsityPattern parse_pattern(std::string_view text);

struct SparsityMask {
    std::vector<std::uint8_t> keep;

    std::size_t kept_count() const;
    std::size_t pruned_count() const { return keep.size() - kept_count(); }
};

// Magnitude-based pruning with exact-N semantics: every N:M group keeps
// exactly N elements (ties broken by tie mode); unstructured prunes exactly
// round(len * p / 100) elements of the whole vector. Kept elements are
// unchanged, pruned elements are exactly 0. The maximum-magnitude element
// of each group is always kept when the kept count is nonzero.
std::pair<Block, SparsityMask> sparsify(std::span<const double> v,
                                        const SparsityPattern& pat);

SparsityMask sparsity_mask(std::span<const double> v,
                           const SparsityPattern& pat);

// v - sparsify(v): the original value at pruned positions, 0 elsewhere.
Block sparsity_error(std::span<const double> v, const SparsityPattern& pat);

// Tensor-level application. N:M acts on consecutive groups of the flattened
// data; unstructured selects one global threshold over the whole tensor.
Tensor sparsify_tensor(const Tensor& t, const SparsityPattern& pat);

}  // namespace interplay
