#include "interplay/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace interplay {

namespace {

constexpr double kIneqTol = 1e-9;
constexpr double kOrderTol = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::size_t pruned_in_range(const SparsityMask& mask, std::size_t begin,
                            std::size_t len) {
    std::size_t c = 0;
    for (std::size_t i = begin; i < begin + len; ++i) c += mask.keep[i] ? 0 : 1;
    return c;
}

std::size_t count_unique(std::vector<std::uint64_t>& bits) {
    std::sort(bits.begin(), bits.end());
    std::size_t uniq = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (i == 0 || bits[i] != bits[i - 1]) ++uniq;
    return uniq;
}

std::vector<std::uint64_t> to_bits(std::span<const double> v) {
    std::vector<std::uint64_t> bits(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint64_t u;
        std::memcpy(&u, &v[i], sizeof u);
        bits[i] = u;
    }
    return bits;
}

}  // namespace

TensorAudit audit_tensor(const Tensor& t, const QuantFormat& f,
                         const SparsityPattern& pat, NormKind p) {
    t.validate();
    require_finite(t.data, "tensor");

    const Tensor q_t = quantize_tensor(t, f);
    const Tensor qs_t = compose_tensor(t, f, pat, Order::SThenQ);
    const Tensor sq_t = compose_tensor(t, f, pat, Order::QThenS);
    const SparsityMask mask_s = sparsity_mask(t.data, pat);
    const SparsityMask mask_sq = sparsity_mask(q_t.data, pat);

    const std::size_t blocks = t.block_count();
    const bool nm = pat.kind == PatternKind::Nm;

    TensorAudit audit;
    audit.p = p.p;
    audit.blocks.reserve(blocks);

    double step_max = 0;
    std::size_t total_pruned_sq = 0;

    Block eq, es, eqs, esq;
    for (std::size_t bi = 0; bi < blocks; ++bi) {
        const auto src = t.block(bi);
        const auto qb = q_t.block(bi);
        const auto qsb = qs_t.block(bi);
        const auto sqb = sq_t.block(bi);
        const std::size_t n = src.size();
        const std::size_t begin = bi * t.block_size;

        eq.resize(n);
        es.resize(n);
        eqs.resize(n);
        esq.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            eq[i] = src[i] - qb[i];
            es[i] = mask_s.keep[begin + i] ? 0.0 : src[i];
            eqs[i] = src[i] - qsb[i];
            esq[i] = src[i] - sqb[i];
        }

        BlockAuditRow row;
        row.index = bi;
        row.n = n;
        row.scale = block_scale(src);
        row.step = step_bound(f, row.scale);
        row.pruned = pruned_in_range(mask_sq, begin, n);
        row.l1_eps_q = lp_norm(eq, {1});
        row.l1_eps_s = lp_norm(es, {1});
        row.l1_eps_qs = lp_norm(eqs, {1});
        row.l1_eps_sq = lp_norm(esq, {1});
        row.lp_eps_q = lp_norm(eq, p);
        row.lp_eps_s = lp_norm(es, p);
        row.lp_eps_qs = lp_norm(eqs, p);
        row.lp_eps_sq = lp_norm(esq, p);
        row.thm37_bound_l1 = row.l1_eps_q + row.l1_eps_s +
                             2.0 * row.step * static_cast<double>(row.pruned);
        row.gen_bound_lp =
            row.lp_eps_q + row.lp_eps_s +
            2.0 * row.step * std::pow(static_cast<double>(row.pruned), 1.0 / p.p);
        row.thm35_holds = row.lp_eps_qs <= row.lp_eps_q + row.lp_eps_s + kIneqTol;
        row.thm37_holds = row.l1_eps_sq <= row.thm37_bound_l1 + kIneqTol;
        row.gen_lp_holds = row.lp_eps_sq <= row.gen_bound_lp + kIneqTol;
        row.l1_order_holds = row.l1_eps_qs <= row.l1_eps_sq + kOrderTol;

        audit.thm35_violations += row.thm35_holds ? 0 : 1;
        if (nm) {
            audit.thm37_violations += row.thm37_holds ? 0 : 1;
            audit.gen_lp_violations += row.gen_lp_holds ? 0 : 1;
            audit.l1_order_violations += row.l1_order_holds ? 0 : 1;
        }

        audit.max_l1_eps_sq = std::max(audit.max_l1_eps_sq, row.l1_eps_sq);
        audit.max_lp_eps_qs = std::max(audit.max_lp_eps_qs, row.lp_eps_qs);
        audit.tensor_l1_eps_q += row.l1_eps_q;
        audit.tensor_l1_eps_s += row.l1_eps_s;
        audit.tensor_l1_eps_qs += row.l1_eps_qs;
        audit.tensor_l1_eps_sq += row.l1_eps_sq;
        step_max = std::max(step_max, row.step);
        total_pruned_sq += row.pruned;

        audit.blocks.push_back(row);
    }

    audit.tensor_thm37_bound =
        audit.tensor_l1_eps_q + audit.tensor_l1_eps_s +
        2.0 * step_max * static_cast<double>(total_pruned_sq);
    audit.tensor_thm37_holds =
        audit.tensor_l1_eps_sq <= audit.tensor_thm37_bound + kIneqTol;
    audit.tensor_l1_order_holds =
        audit.tensor_l1_eps_qs <= audit.tensor_l1_eps_sq + kOrderTol;

    if (!nm) {
        audit.thm37_violations += audit.tensor_thm37_holds ? 0 : 1;
        if (blocks == 1)
            audit.l1_order_violations += audit.tensor_l1_order_holds ? 0 : 1;
    }
    return audit;
}

DotAudit audit_dot(std::span<const double> x, std::span<const double> w,
                   const QuantFormat& f, const SparsityPattern& pat,
                   Order ord) {
    if (x.size() != w.size())
        throw std::invalid_argument("x/w: length mismatch");
    const Block qx = quantize_block(x, f);
    const Block qw = quantize_block(w, f);
    const CompositionResult cw = compose(w, f, pat, ord);
    Block eps_qx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) eps_qx[i] = x[i] - qx[i];

    DotAudit a;
    a.order = ord;
    a.dot_xw = dot(x, w);
    a.eps_total = a.dot_xw - dot(qx, cw.output);
    a.eps_s_dot = dot(x, cw.eps_s);
    a.eps_q_dot = a.dot_xw - dot(qx, qw);
    a.eps_t = dot(qx, cw.eps_correction);
    a.eps_i = dot(eps_qx, cw.eps_s);
    a.identity_residual =
        std::fabs(a.eps_total - (a.eps_s_dot + a.eps_q_dot + a.eps_t - a.eps_i));
    if (a.eps_total == 0.0) {
        a.deviation_defined = false;
        a.deviation = std::numeric_limits<double>::infinity();
    } else {
        a.deviation_defined = true;
        a.deviation = (std::fabs(a.eps_s_dot) + std::fabs(a.eps_q_dot) +
                       std::fabs(a.eps_t) + std::fabs(a.eps_i)) /
                      std::fabs(a.eps_total);
    }
    return a;
}

std::vector<double> default_deviation_bins() {
    return {1.0, 1.05, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0};
}

DeviationSummary deviation_experiment(const DeviationConfig& cfg) {
    if (cfg.count < 1) throw std::invalid_argument("count: must be >= 1");
    DeviationSummary out;
    out.order = cfg.order;
    out.bin_edges = cfg.bin_edges.empty() ? default_deviation_bins() : cfg.bin_edges;
    if (out.bin_edges.size() < 2 ||
        !std::is_sorted(out.bin_edges.begin(), out.bin_edges.end()))
        throw std::invalid_argument("bins: need >= 2 ascending edges");
    out.bin_counts.assign(out.bin_edges.size(), 0);  // last = overflow

    out.samples.reserve(cfg.count);
    double dev_min = std::numeric_limits<double>::infinity();
    double dev_max = 0, dev_sum = 0;
    std::size_t defined = 0;
    double sh_s = 0, sh_q = 0, sh_t = 0, sh_i = 0;
    std::size_t low = 0;

    for (std::size_t k = 0; k < cfg.count; ++k) {
        const Block x =
            gaussian_block(cfg.n, cfg.seed.with_stream(cfg.seed.stream + 2 * k));
        const Block w = gaussian_block(
            cfg.n, cfg.seed.with_stream(cfg.seed.stream + 2 * k + 1));
        DotAudit a = audit_dot(x, w, cfg.fmt, cfg.pat, cfg.order);
        if (!a.deviation_defined) {
            ++out.undefined_count;
            out.samples.push_back(a);
            continue;
        }
        ++defined;
        dev_min = std::min(dev_min, a.deviation);
        dev_max = std::max(dev_max, a.deviation);
        dev_sum += a.deviation;
        if (a.deviation < cfg.low_dev_cut) {
            ++low;
            const double total = std::fabs(a.eps_s_dot) + std::fabs(a.eps_q_dot) +
                                 std::fabs(a.eps_t) + std::fabs(a.eps_i);
            if (total > 0) {
                sh_s += std::fabs(a.eps_s_dot) / total;
                sh_q += std::fabs(a.eps_q_dot) / total;
                sh_t += std::fabs(a.eps_t) / total;
                sh_i += std::fabs(a.eps_i) / total;
            }
        }
        if (a.deviation < 2.0) ++out.below_two;
        auto it = std::upper_bound(out.bin_edges.begin(), out.bin_edges.end(),
                                   a.deviation);
        const std::size_t idx =
            it == out.bin_edges.begin()
                ? 0
                : static_cast<std::size_t>(it - out.bin_edges.begin()) - 1;
        out.bin_counts[std::min(idx, out.bin_counts.size() - 1)] += 1;
        out.samples.push_back(a);
    }

    out.below_low_cut = low;
    if (defined > 0) {
        out.min_deviation = dev_min;
        out.max_deviation = dev_max;
        out.mean_deviation = dev_sum / static_cast<double>(defined);
    }
    if (low > 0) {
        out.low_dev_shares.s = sh_s / static_cast<double>(low);
        out.low_dev_shares.q = sh_q / static_cast<double>(low);
        out.low_dev_shares.t = sh_t / static_cast<double>(low);
        out.low_dev_shares.i = sh_i / static_cast<double>(low);
        out.low_dev_shares.samples = low;
    }
    return out;
}

CollisionReport collision_report(const Tensor& t, const QuantFormat& f) {
    t.validate();
    require_finite(t.data, "tensor");
    const Tensor q_t = quantize_tensor(t, f);

    CollisionReport rep;
    {
        auto before = to_bits(t.data);
        auto after = to_bits(q_t.data);
        rep.tensor_unique_before = count_unique(before);
        rep.tensor_unique_after = count_unique(after);
    }
    const std::size_t blocks = t.block_count();
    rep.per_block_reduction.reserve(blocks);
    for (std::size_t bi = 0; bi < blocks; ++bi) {
        auto before = to_bits(t.block(bi));
        auto after = to_bits(q_t.block(bi));
        const std::size_t ub = count_unique(before);
        const std::size_t ua = count_unique(after);
        const std::size_t red = ub > ua ? ub - ua : 0;
        rep.per_block_reduction.push_back(red);
        if (red >= 1) ++rep.blocks_with_reduction;
        rep.max_block_reduction_fraction =
            std::max(rep.max_block_reduction_fraction,
                     static_cast<double>(red) / static_cast<double>(t.block(bi).size()));
    }
    return rep;
}

const char* direction_name(Direction d) {
    return d == Direction::LowerIsBetter ? "lower" : "higher";
}

Direction parse_direction(std::string_view text) {
    if (text == "lower") return Direction::LowerIsBetter;
    if (text == "higher") return Direction::HigherIsBetter;
    throw std::invalid_argument("direction: expected 'lower' or 'higher'");
}

ThresholdReport orthogonality_threshold(double em_base, double em_q,
                                        double em_s, Direction dir,
                                        std::optional<double> em_combined) {
    for (double v : {em_base, em_q, em_s})
        if (!std::isfinite(v))
            throw std::invalid_argument("metric: non-finite input");
    ThresholdReport r;
    r.em_base = em_base;
    r.em_q = em_q;
    r.em_s = em_s;
    r.err_q = em_q - em_base;
    r.err_s = em_s - em_base;
    r.threshold = em_base + r.err_q + r.err_s;
    r.direction = dir;
    if (em_combined) {
        if (!std::isfinite(*em_combined))
            throw std::invalid_argument("metric: non-finite input");
        r.em_combined = em_combined;
        r.beats = dir == Direction::LowerIsBetter ? *em_combined <= r.threshold
                                                  : *em_combined >= r.threshold;
    }
    return r;
}

}  // namespace interplay
