#include "interplay/sparsify.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace interplay {

namespace {

void validate_pattern(const SparsityPattern& pat) {
    if (pat.kind == PatternKind::Nm) {
        if (pat.n < 1 || pat.m < 1 || pat.n > pat.m)
            throw std::invalid_argument("pattern: N:M requires 1 <= N <= M");
    } else {
        if (!(pat.percent >= 0.0 && pat.percent <= 100.0))
            throw std::invalid_argument("pattern: p must be in [0, 100]");
    }
}

// Indices of `count` kept elements among [begin, begin+len): the largest
// magnitudes, ties resolved by index per tie mode.
void mark_kept(std::span<const double> v, std::size_t begin, std::size_t len,
               std::size_t keep_count, TieMode tie,
               std::vector<std::uint8_t>& keep,
               std::vector<std::uint32_t>& scratch) {
    scratch.resize(len);
    std::iota(scratch.begin(), scratch.end(), static_cast<std::uint32_t>(begin));
    const bool earlier = tie == TieMode::KeepEarlier;
    auto larger = [&](std::uint32_t a, std::uint32_t b) {
        const double ma = std::fabs(v[a]);
        const double mb = std::fabs(v[b]);
        if (ma != mb) return ma > mb;
        return earlier ? a < b : a > b;
    };
    if (keep_count < len)
        std::nth_element(scratch.begin(), scratch.begin() + keep_count,
                         scratch.end(), larger);
    for (std::size_t i = 0; i < keep_count; ++i) keep[scratch[i]] = 1;
}

std::size_t unstructured_prune_count(std::size_t total, double percent) {
    return static_cast<std::size_t>(
        std::llround(static_cast<double>(total) * percent / 100.0));
}

}  // namespace

std::string SparsityPattern::to_string() const {
    if (kind == PatternKind::Nm)
        return std::to_string(n) + ":" + std::to_string(m);
    // Trim trailing zeros so "50%" round-trips as typed.
    std::string p = std::to_string(percent);
    p.erase(p.find_last_not_of('0') + 1);
    if (!p.empty() && p.back() == '.') p.pop_back();
    return p + "%";
}

SparsityPattern parse_pattern(std::string_view text) {
    SparsityPattern pat;
    if (!text.empty() && text.back() == '%') {
        pat.kind = PatternKind::Unstructured;
        const std::string_view num = text.substr(0, text.size() - 1);
        double p = 0;
        const auto res = std::from_chars(num.data(), num.data() + num.size(), p);
        if (res.ec != std::errc{} || res.ptr != num.data() + num.size())
            throw std::invalid_argument("pattern: malformed percentage '" +
                                        std::string(text) + "'");
        pat.percent = p;
        validate_pattern(pat);
        return pat;
    }
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw std::invalid_argument("pattern: expected 'N:M' or 'p%', got '" +
                                    std::string(text) + "'");
    int n = 0, m = 0;
    const std::string_view ns = text.substr(0, colon);
    const std::string_view ms = text.substr(colon + 1);
    const auto rn = std::from_chars(ns.data(), ns.data() + ns.size(), n);
    const auto rm = std::from_chars(ms.data(), ms.data() + ms.size(), m);
    if (rn.ec != std::errc{} || rn.ptr != ns.data() + ns.size() ||
        rm.ec != std::errc{} || rm.ptr != ms.data() + ms.size())
        throw std::invalid_argument("pattern: malformed N:M '" +
                                    std::string(text) + "'");
    pat.kind = PatternKind::Nm;
    pat.n = n;
    pat.m = m;
    validate_pattern(pat);
    return pat;
}

std::size_t SparsityMask::kept_count() const {
    std::size_t c = 0;
    for (std::uint8_t k : keep) c += k;
    return c;
}

SparsityMask sparsity_mask(std::span<const double> v,
                           const SparsityPattern& pat) {
    validate_pattern(pat);
    require_finite(v, "v");
    SparsityMask mask;
    mask.keep.assign(v.size(), 0);
    std::vector<std::uint32_t> scratch;
    if (pat.kind == PatternKind::Nm) {
        const std::size_t m = static_cast<std::size_t>(pat.m);
        if (v.empty() || v.size() % m != 0)
            throw std::invalid_argument("v: length not divisible by M");
        for (std::size_t g = 0; g < v.size(); g += m)
            mark_kept(v, g, m, static_cast<std::size_t>(pat.n), pat.tie,
                      mask.keep, scratch);
    } else {
        if (v.empty()) throw std::invalid_argument("v: empty vector");
        const std::size_t pruned = unstructured_prune_count(v.size(), pat.percent);
        mark_kept(v, 0, v.size(), v.size() - pruned, pat.tie, mask.keep,
                  scratch);
    }
    return mask;
}

std::pair<Block, SparsityMask> sparsify(std::span<const double> v,
                                        const SparsityPattern& pat) {
    SparsityMask mask = sparsity_mask(v, pat);
    Block out(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (mask.keep[i]) out[i] = v[i];
    return {std::move(out), std::move(mask)};
}

Block sparsity_error(std::span<const double> v, const SparsityPattern& pat) {
    SparsityMask mask = sparsity_mask(v, pat);
    Block err(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!mask.keep[i]) err[i] = v[i];
    return err;
}

Tensor sparsify_tensor(const Tensor& t, const SparsityPattern& pat) {
    t.validate(true);
    Tensor out = t;
    auto [values, mask] = sparsify(t.data, pat);
    out.data = std::move(values);
    return out;
}

}  // namespace interplay
