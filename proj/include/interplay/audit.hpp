#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "interplay/compose.hpp"
#include "interplay/rng.hpp"

namespace interplay {

// One block's worth of tensor-level orthogonality checks.
struct BlockAuditRow {
    std::size_t index = 0;
    std::size_t n = 0;
    double scale = 0;
    double step = 0;
    std::size_t pruned = 0;  // pruned positions in this block (s∘q mask)
    double l1_eps_q = 0, l1_eps_s = 0, l1_eps_qs = 0, l1_eps_sq = 0;
    double lp_eps_q = 0, lp_eps_s = 0, lp_eps_qs = 0, lp_eps_sq = 0;
    double thm37_bound_l1 = 0;  // ||eps_q||1 + ||eps_s||1 + 2*step*pruned
    double gen_bound_lp = 0;    // ||eps_q||p + ||eps_s||p + 2*step*pruned^(1/p)
    bool thm35_holds = true;
    bool thm37_holds = true;
    bool gen_lp_holds = true;
    bool l1_order_holds = true;
};

// The thm37/l1-order statements are per-block theorems for N:M patterns
// (one shared grid per block). For unstructured patterns the global
// threshold spans blocks with different grids, so those two are counted as
// violations only where they are actually theorems: thm37 at tensor level
// (with step = max block step) and l1-order for single-block tensors. The
// per-block flags are still reported as data for every pattern.
struct TensorAudit {
    double p = 1.0;
    std::vector<BlockAuditRow> blocks;

    std::size_t thm35_violations = 0;
    std::size_t thm37_violations = 0;
    std::size_t gen_lp_violations = 0;
    std::size_t l1_order_violations = 0;

    double max_l1_eps_sq = 0;
    double max_lp_eps_qs = 0;

    // Tensor-level L1 aggregates (sums over blocks).
    double tensor_l1_eps_q = 0, tensor_l1_eps_s = 0;
    double tensor_l1_eps_qs = 0, tensor_l1_eps_sq = 0;
    double tensor_thm37_bound = 0;
    bool tensor_thm37_holds = true;
    bool tensor_l1_order_holds = true;  // informational for multi-block
                                        // unstructured tensors

    std::size_t total_violations() const {
        return thm35_violations + thm37_violations + gen_lp_violations +
               l1_order_violations;
    }
};

TensorAudit audit_tensor(const Tensor& t, const QuantFormat& f,
                         const SparsityPattern& pat, NormKind p);

// Dot-product error decomposition for one (x, w) pair where x is only
// quantized and w goes through the composition:
//   eps_total = <x,w> - <q(x), c(w)>
//   eps_s_dot = <x, eps_s(w)>
//   eps_q_dot = <x,w> - <q(x), q(w)>
//   eps_t     = <q(x), correction(w)>
//   eps_i     = <eps_q(x), eps_s(w)>
// and eps_total = eps_s_dot + eps_q_dot + eps_t - eps_i identically.
struct DotAudit {
    Order order = Order::SThenQ;
    double dot_xw = 0;
    double eps_total = 0;
    double eps_s_dot = 0;
    double eps_q_dot = 0;
    double eps_t = 0;
    double eps_i = 0;
    bool deviation_defined = false;
    double deviation = 0;  // (|eps_s_dot|+|eps_q_dot|+|eps_t|+|eps_i|) / |eps_total|
    double identity_residual = 0;
};

DotAudit audit_dot(std::span<const double> x, std::span<const double> w,
                   const QuantFormat& f, const SparsityPattern& pat,
                   Order ord);

struct DeviationConfig {
    std::size_t count = 1000;
    std::size_t n = 64;
    QuantFormat fmt;
    SparsityPattern pat;
    Order order = Order::QThenS;
    SeedSpec seed;
    std::vector<double> bin_edges;  // defaults applied when empty
    double low_dev_cut = 1.05;      // term-share subset filter
};

struct TermShares {
    double s = 0, q = 0, t = 0, i = 0;  // mean normalized |term| shares
    std::size_t samples = 0;            // subset size
};

struct DeviationSummary {
    Order order = Order::QThenS;
    std::vector<DotAudit> samples;
    std::vector<double> bin_edges;
    std::vector<std::size_t> bin_counts;  // bin_edges.size()-1 interior bins
                                          // plus one trailing overflow bin
    std::size_t undefined_count = 0;      // eps_total == 0, excluded
    double min_deviation = 0;
    double max_deviation = 0;
    double mean_deviation = 0;
    std::size_t below_low_cut = 0;  // deviation < low_dev_cut
    std::size_t below_two = 0;      // deviation < 2
    TermShares low_dev_shares;
};

DeviationSummary deviation_experiment(const DeviationConfig& cfg);

std::vector<double> default_deviation_bins();

struct CollisionReport {
    std::size_t tensor_unique_before = 0;
    std::size_t tensor_unique_after = 0;
    std::vector<std::size_t> per_block_reduction;
    double max_block_reduction_fraction = 0;
    std::size_t blocks_with_reduction = 0;
};

// Exact unique-value counts (64-bit patterns) before/after quantization.
CollisionReport collision_report(const Tensor& t, const QuantFormat& f);

enum class Direction { LowerIsBetter, HigherIsBetter };

const char* direction_name(Direction d);
Direction parse_direction(std::string_view text);

struct ThresholdReport {
    double em_base = 0, em_q = 0, em_s = 0;
    double err_q = 0, err_s = 0;
    double threshold = 0;  // em_base + err_q + err_s
    Direction direction = Direction::LowerIsBetter;
    std::optional<double> em_combined;
    std::optional<bool> beats;  // combined metric on the orthogonal side
};

ThresholdReport orthogonality_threshold(double em_base, double em_q,
                                        double em_s, Direction dir,
                                        std::optional<double> em_combined = {});

}  // namespace interplay
