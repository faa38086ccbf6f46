// compress-interplay: block quantization / magnitude sparsity toolkit and
// theorem auditor. Exit codes: 0 ok, 1 audit violation (--strict), 2 I/O or
// format error, 3 bad arguments.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "interplay/audit.hpp"
#include "interplay/compose.hpp"
#include "interplay/propagate.hpp"
#include "interplay/report.hpp"
#include "interplay/tnsr.hpp"

namespace ip = interplay;
using ordered_json = nlohmann::ordered_json;

namespace {

struct ExitWithCode {
    int code;
};

std::vector<std::size_t> parse_dims(const std::string& text) {
    std::vector<std::size_t> dims;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = text.find('x', pos);
        const std::string part =
            text.substr(pos, next == std::string::npos ? next : next - pos);
        if (part.empty()) throw std::invalid_argument("synthetic: malformed dims");
        dims.push_back(static_cast<std::size_t>(std::stoull(part)));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (dims.empty()) throw std::invalid_argument("synthetic: empty dims");
    return dims;
}

std::vector<ip::Order> parse_orders(const std::string& text) {
    if (text == "both") return {ip::Order::SThenQ, ip::Order::QThenS};
    return {ip::parse_order(text)};
}

ip::Tensor load_input_tensor(const std::string& input,
                             const std::string& synthetic,
                             std::size_t block_size, ip::SeedSpec seed,
                             ip::TnsrDtype* dtype_out = nullptr) {
    if (!input.empty() && !synthetic.empty())
        throw std::invalid_argument("input: give either --input or --synthetic");
    if (!input.empty()) {
        const ip::TnsrFile f = ip::tnsr_read(input);
        if (dtype_out) *dtype_out = f.dtype;
        ip::Tensor t;
        t.shape.assign(f.dims.begin(), f.dims.end());
        t.data = f.data;
        t.block_size = block_size;
        return t;
    }
    if (synthetic.empty())
        throw std::invalid_argument("input: --input or --synthetic required");
    if (dtype_out) *dtype_out = ip::TnsrDtype::F64;
    return ip::gaussian_tensor(parse_dims(synthetic), block_size, seed);
}

void echo_stats(std::span<const double> err) {
    double max_abs = 0, sum_abs = 0, sum_sq = 0;
    for (double e : err) {
        max_abs = std::max(max_abs, std::fabs(e));
        sum_abs += std::fabs(e);
        sum_sq += e * e;
    }
    std::cout << "max_abs_err=" << ip::fmt_double(max_abs)
              << " mean_abs_err="
              << ip::fmt_double(err.empty() ? 0.0
                                            : sum_abs / static_cast<double>(err.size()))
              << " l1_err=" << ip::fmt_double(sum_abs)
              << " l2_err=" << ip::fmt_double(std::sqrt(sum_sq)) << "\n";
}

ordered_json base_report(const char* command, const ordered_json& config) {
    ordered_json j;
    j["command"] = command;
    j["version"] = std::string(ip::kVersion);
    j["config"] = config;
    j["config_hash"] = ip::config_hash(config);
    return j;
}

void write_json(const std::string& path, const ordered_json& j) {
    ip::atomic_write(path, j.dump(2) + "\n");
}

ordered_json deviation_summary_json(const ip::DeviationSummary& s) {
    ordered_json j;
    j["count"] = s.samples.size();
    j["undefined"] = s.undefined_count;
    j["min_deviation"] = s.min_deviation;
    j["max_deviation"] = s.max_deviation;
    j["mean_deviation"] = s.mean_deviation;
    j["below_low_cut"] = s.below_low_cut;
    j["below_two"] = s.below_two;
    j["bin_edges"] = s.bin_edges;
    j["bin_counts"] = s.bin_counts;
    ordered_json shares;
    shares["eps_s"] = s.low_dev_shares.s;
    shares["eps_q"] = s.low_dev_shares.q;
    shares["eps_t"] = s.low_dev_shares.t;
    shares["eps_i"] = s.low_dev_shares.i;
    shares["samples"] = s.low_dev_shares.samples;
    j["low_dev_term_shares"] = shares;
    return j;
}

void append_deviation_csv(ip::CsvWriter& csv, const ip::DeviationSummary& s) {
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        const ip::DotAudit& a = s.samples[i];
        csv.field(static_cast<std::uint64_t>(i));
        csv.field(std::string_view(ip::order_name(a.order)));
        csv.field(a.dot_xw);
        csv.field(a.eps_total);
        csv.field(a.eps_s_dot);
        csv.field(a.eps_q_dot);
        csv.field(a.eps_t);
        csv.field(a.eps_i);
        csv.field(a.deviation);
        csv.end_row();
    }
}

ordered_json audit_summary_json(const ip::TensorAudit& a, std::size_t blocks) {
    ordered_json j;
    j["blocks"] = blocks;
    j["p"] = a.p;
    ordered_json viol;
    viol["thm35"] = a.thm35_violations;
    viol["thm37"] = a.thm37_violations;
    viol["gen_lp"] = a.gen_lp_violations;
    viol["l1_order"] = a.l1_order_violations;
    j["violations"] = viol;
    ordered_json tensor;
    tensor["l1_eps_q"] = a.tensor_l1_eps_q;
    tensor["l1_eps_s"] = a.tensor_l1_eps_s;
    tensor["l1_eps_qs"] = a.tensor_l1_eps_qs;
    tensor["l1_eps_sq"] = a.tensor_l1_eps_sq;
    tensor["thm37_bound"] = a.tensor_thm37_bound;
    tensor["thm37_holds"] = a.tensor_thm37_holds;
    tensor["l1_order_holds"] = a.tensor_l1_order_holds;
    j["tensor"] = tensor;
    ordered_json mx;
    mx["l1_eps_sq"] = a.max_l1_eps_sq;
    mx["lp_eps_qs"] = a.max_lp_eps_qs;
    j["max"] = mx;
    return j;
}

ordered_json dot_audit_json(const ip::DotAudit& a) {
    ordered_json j;
    j["order"] = ip::order_name(a.order);
    j["dot_xw"] = a.dot_xw;
    j["eps_total"] = a.eps_total;
    j["eps_s_dot"] = a.eps_s_dot;
    j["eps_q_dot"] = a.eps_q_dot;
    j["eps_t"] = a.eps_t;
    j["eps_i"] = a.eps_i;
    j["deviation_defined"] = a.deviation_defined;
    j["deviation"] = a.deviation_defined ? ordered_json(a.deviation)
                                         : ordered_json("undefined");
    j["identity_residual"] = a.identity_residual;
    return j;
}

// ---------------------------------------------------------------- quantize

struct QuantizeArgs {
    std::string input, output, preset = "HBFP6-appendix";
    std::size_t block_size = 64;
};

int run_quantize(const QuantizeArgs& a) {
    ip::TnsrDtype dtype = ip::TnsrDtype::F64;
    ip::Tensor t = load_input_tensor(a.input, "", a.block_size, {}, &dtype);
    t.validate();
    const ip::QuantFormat fmt = ip::preset(a.preset, a.block_size);
    const ip::Tensor q = ip::quantize_tensor(t, fmt);
    std::vector<double> err(t.data.size());
    for (std::size_t i = 0; i < err.size(); ++i) err[i] = t.data[i] - q.data[i];
    ip::TnsrFile out;
    out.dtype = dtype;
    out.dims.assign(q.shape.begin(), q.shape.end());
    out.data = q.data;
    ip::tnsr_write(a.output, out);
    echo_stats(err);
    return 0;
}

// ---------------------------------------------------------------- sparsify

struct SparsifyArgs {
    std::string input, output, pattern = "2:4", tie = "earlier";
};

int run_sparsify(const SparsifyArgs& a) {
    ip::TnsrDtype dtype = ip::TnsrDtype::F64;
    ip::Tensor t = load_input_tensor(a.input, "", 64, {}, &dtype);
    ip::SparsityPattern pat = ip::parse_pattern(a.pattern);
    pat.tie = a.tie == "later" ? ip::TieMode::KeepLater : ip::TieMode::KeepEarlier;
    const ip::Tensor s = ip::sparsify_tensor(t, pat);
    std::vector<double> err(t.data.size());
    std::size_t pruned = 0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        err[i] = t.data[i] - s.data[i];
        if (s.data[i] == 0.0 && t.data[i] != 0.0) ++pruned;
    }
    ip::TnsrFile out;
    out.dtype = dtype;
    out.dims.assign(s.shape.begin(), s.shape.end());
    out.data = s.data;
    ip::tnsr_write(a.output, out);
    std::cout << "pruned=" << pruned << " of " << t.data.size() << "\n";
    echo_stats(err);
    return 0;
}

// ------------------------------------------------------------ audit-tensor

struct AuditTensorArgs {
    std::string input, synthetic, preset = "HBFP6-appendix", pattern = "2:4";
    double p = 1.0;
    std::size_t block_size = 64;
    std::uint64_t seed = 1, stream = 0;
    std::string csv_out, json_out;
    bool strict = false;
};

int run_audit_tensor(const AuditTensorArgs& a) {
    const ip::Tensor t = load_input_tensor(a.input, a.synthetic, a.block_size,
                                           {a.seed, a.stream});
    const ip::QuantFormat fmt = ip::preset(a.preset, a.block_size);
    const ip::SparsityPattern pat = ip::parse_pattern(a.pattern);
    const ip::TensorAudit audit = ip::audit_tensor(t, fmt, pat, {a.p});

    if (!a.csv_out.empty()) {
        ip::CsvWriter csv(
            "block_index,n,scale,step,pruned,l1_eps_q,l1_eps_s,l1_eps_qs,"
            "l1_eps_sq,lp_eps_q,lp_eps_s,lp_eps_qs,lp_eps_sq,thm37_bound_l1,"
            "gen_bound_lp,thm35_holds,thm37_holds,gen_lp_holds,l1_order_holds");
        for (const ip::BlockAuditRow& r : audit.blocks) {
            csv.field(static_cast<std::uint64_t>(r.index));
            csv.field(static_cast<std::uint64_t>(r.n));
            csv.field(r.scale);
            csv.field(r.step);
            csv.field(static_cast<std::uint64_t>(r.pruned));
            csv.field(r.l1_eps_q);
            csv.field(r.l1_eps_s);
            csv.field(r.l1_eps_qs);
            csv.field(r.l1_eps_sq);
            csv.field(r.lp_eps_q);
            csv.field(r.lp_eps_s);
            csv.field(r.lp_eps_qs);
            csv.field(r.lp_eps_sq);
            csv.field(r.thm37_bound_l1);
            csv.field(r.gen_bound_lp);
            csv.field(r.thm35_holds);
            csv.field(r.thm37_holds);
            csv.field(r.gen_lp_holds);
            csv.field(r.l1_order_holds);
            csv.end_row();
        }
        ip::atomic_write(a.csv_out, csv.str());
    }

    ordered_json config;
    config["input"] = a.input.empty() ? "synthetic:" + a.synthetic : a.input;
    config["preset"] = a.preset;
    config["pattern"] = a.pattern;
    config["p"] = a.p;
    config["block_size"] = a.block_size;
    config["seed"] = a.seed;
    config["stream"] = a.stream;
    ordered_json j = base_report("audit-tensor", config);
    j["summary"] = audit_summary_json(audit, audit.blocks.size());
    if (!a.json_out.empty()) write_json(a.json_out, j);

    std::cout << "blocks=" << audit.blocks.size()
              << " violations=" << audit.total_violations() << "\n";
    if (a.strict && audit.total_violations() > 0) return 1;
    return 0;
}

// --------------------------------------------------------------- audit-dot

struct AuditDotArgs {
    std::string x_path, w_path, preset = "HBFP6-appendix", pattern = "2:4",
                order = "qs";
    std::string json_out;
};

int run_audit_dot(const AuditDotArgs& a) {
    const ip::TnsrFile xf = ip::tnsr_read(a.x_path);
    const ip::TnsrFile wf = ip::tnsr_read(a.w_path);
    const ip::QuantFormat fmt = ip::preset(a.preset, xf.data.size());
    const ip::SparsityPattern pat = ip::parse_pattern(a.pattern);
    const ip::DotAudit audit =
        ip::audit_dot(xf.data, wf.data, fmt, pat, ip::parse_order(a.order));

    ordered_json config;
    config["x"] = a.x_path;
    config["w"] = a.w_path;
    config["preset"] = a.preset;
    config["pattern"] = a.pattern;
    config["order"] = a.order;
    ordered_json j = base_report("audit-dot", config);
    j["audit"] = dot_audit_json(audit);
    if (!a.json_out.empty()) write_json(a.json_out, j);
    std::cout << j["audit"].dump(2) << "\n";
    return 0;
}

// --------------------------------------------------------------- deviation

struct DeviationArgs {
    std::size_t count = 1000, n = 64;
    std::string preset = "HBFP6-appendix", pattern = "2:4", order = "both";
    std::uint64_t seed = 1, stream = 0;
    std::vector<double> bin_edges;
    std::string csv_out, json_out;
};

int run_deviation(const DeviationArgs& a) {
    ordered_json config;
    config["count"] = a.count;
    config["n"] = a.n;
    config["preset"] = a.preset;
    config["pattern"] = a.pattern;
    config["order"] = a.order;
    config["seed"] = a.seed;
    config["stream"] = a.stream;
    config["bin_edges"] =
        a.bin_edges.empty() ? ip::default_deviation_bins() : a.bin_edges;
    ordered_json j = base_report("deviation", config);

    ip::CsvWriter csv(
        "sample,order,dot_xw,eps_total,eps_s_dot,eps_q_dot,eps_t,eps_i,deviation");
    ordered_json orders;
    for (ip::Order ord : parse_orders(a.order)) {
        ip::DeviationConfig cfg;
        cfg.count = a.count;
        cfg.n = a.n;
        cfg.fmt = ip::preset(a.preset, a.n);
        cfg.pat = ip::parse_pattern(a.pattern);
        cfg.order = ord;
        cfg.seed = {a.seed, a.stream};
        cfg.bin_edges = a.bin_edges;
        const ip::DeviationSummary s = ip::deviation_experiment(cfg);
        append_deviation_csv(csv, s);
        orders[ip::order_name(ord)] = deviation_summary_json(s);
    }
    j["orders"] = orders;
    if (!a.csv_out.empty()) ip::atomic_write(a.csv_out, csv.str());
    if (!a.json_out.empty()) write_json(a.json_out, j);
    for (auto& [name, summary] : orders.items())
        std::cout << name << ": min="
                  << ip::fmt_double(summary["min_deviation"].get<double>())
                  << " mean="
                  << ip::fmt_double(summary["mean_deviation"].get<double>())
                  << " eps_t_share="
                  << ip::fmt_double(
                         summary["low_dev_term_shares"]["eps_t"].get<double>())
                  << "\n";
    return 0;
}

// ----------------------------------------------------------------- collide

struct CollideArgs {
    std::string input, synthetic, preset = "HBFP6-appendix";
    std::size_t block_size = 64;
    std::uint64_t seed = 1, stream = 0;
    std::string csv_out, json_out;
};

int run_collide(const CollideArgs& a) {
    const ip::Tensor t =
        load_input_tensor(a.input, a.synthetic, a.block_size, {a.seed, a.stream});
    const ip::QuantFormat fmt = ip::preset(a.preset, a.block_size);
    const ip::CollisionReport rep = ip::collision_report(t, fmt);

    if (!a.csv_out.empty()) {
        ip::CsvWriter csv("block_index,reduction,reduction_fraction");
        for (std::size_t i = 0; i < rep.per_block_reduction.size(); ++i) {
            csv.field(static_cast<std::uint64_t>(i));
            csv.field(static_cast<std::uint64_t>(rep.per_block_reduction[i]));
            csv.field(static_cast<double>(rep.per_block_reduction[i]) /
                      static_cast<double>(t.block(i).size()));
            csv.end_row();
        }
        ip::atomic_write(a.csv_out, csv.str());
    }

    ordered_json config;
    config["input"] = a.input.empty() ? "synthetic:" + a.synthetic : a.input;
    config["preset"] = a.preset;
    config["block_size"] = a.block_size;
    config["seed"] = a.seed;
    config["stream"] = a.stream;
    ordered_json j = base_report("collide", config);
    ordered_json rj;
    rj["tensor_unique_before"] = rep.tensor_unique_before;
    rj["tensor_unique_after"] = rep.tensor_unique_after;
    rj["delta_unique"] = rep.tensor_unique_before - rep.tensor_unique_after;
    rj["blocks"] = rep.per_block_reduction.size();
    rj["blocks_with_reduction"] = rep.blocks_with_reduction;
    rj["max_block_reduction_fraction"] = rep.max_block_reduction_fraction;
    j["report"] = rj;
    if (!a.json_out.empty()) write_json(a.json_out, j);
    std::cout << "unique " << rep.tensor_unique_before << " -> "
              << rep.tensor_unique_after << ", max block reduction fraction "
              << ip::fmt_double(rep.max_block_reduction_fraction) << "\n";
    return 0;
}

// --------------------------------------------------------------- propagate

struct PropagateArgs {
    std::size_t depth = 12, width = 256, batch = 8, block_size = 64;
    std::string activation = "relu", preset = "HBFP6-appendix", pattern,
                order = "both", compress_layers = "all";
    std::uint64_t seed = 1;
    std::size_t seeds = 1;
    std::string csv_out, json_out;
};

int run_propagate(const PropagateArgs& a) {
    ip::StackConfig cfg;
    cfg.depth = a.depth;
    cfg.width = a.width;
    cfg.batch = a.batch;
    cfg.activation = ip::parse_activation(a.activation);
    cfg.fmt = ip::preset(a.preset, a.block_size);
    if (!a.pattern.empty()) cfg.pat = ip::parse_pattern(a.pattern);
    if (a.compress_layers == "none") {
        cfg.compress_layers = std::vector<std::size_t>{};
    } else if (a.compress_layers != "all") {
        std::vector<std::size_t> idx;
        std::size_t pos = 0;
        const std::string& s = a.compress_layers;
        while (pos < s.size()) {
            const std::size_t next = s.find(',', pos);
            idx.push_back(static_cast<std::size_t>(
                std::stoull(s.substr(pos, next - pos))));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        cfg.compress_layers = std::move(idx);
    }

    ordered_json config;
    config["depth"] = a.depth;
    config["width"] = a.width;
    config["batch"] = a.batch;
    config["activation"] = a.activation;
    config["preset"] = a.preset;
    config["pattern"] = a.pattern;
    config["order"] = a.order;
    config["block_size"] = a.block_size;
    config["compress_layers"] = a.compress_layers;
    config["seed"] = a.seed;
    config["seeds"] = a.seeds;
    ordered_json j = base_report("propagate", config);

    ip::CsvWriter csv("layer_index,rel_l2_error,order,seed");
    ordered_json orders;
    for (ip::Order ord : parse_orders(a.order)) {
        cfg.order = ord;
        std::vector<double> mean_trace(a.depth, 0.0);
        double final_sum = 0;
        for (std::size_t s = 0; s < a.seeds; ++s) {
            cfg.seed = {a.seed + s, 0};
            const ip::PropagationTrace trace = ip::simulate_stack(cfg);
            for (std::size_t l = 0; l < trace.size(); ++l) {
                csv.field(static_cast<std::uint64_t>(l));
                csv.field(trace[l]);
                csv.field(std::string_view(ip::order_name(ord)));
                csv.field(a.seed + s);
                csv.end_row();
                mean_trace[l] += trace[l];
            }
            final_sum += trace.back();
        }
        for (double& v : mean_trace) v /= static_cast<double>(a.seeds);
        ordered_json oj;
        oj["mean_trace"] = mean_trace;
        oj["mean_final"] = final_sum / static_cast<double>(a.seeds);
        orders[ip::order_name(ord)] = oj;
    }
    j["orders"] = orders;
    if (!a.csv_out.empty()) ip::atomic_write(a.csv_out, csv.str());
    if (!a.json_out.empty()) write_json(a.json_out, j);
    for (auto& [name, oj] : orders.items())
        std::cout << name << ": mean_final="
                  << ip::fmt_double(oj["mean_final"].get<double>()) << "\n";
    return 0;
}

// --------------------------------------------------------------- threshold

struct ThresholdArgs {
    double em_base = 0, em_q = 0, em_s = 0;
    double em_combined = std::numeric_limits<double>::quiet_NaN();
    std::string direction = "lower";
    std::string json_out;
};

int run_threshold(const ThresholdArgs& a) {
    std::optional<double> combined;
    if (!std::isnan(a.em_combined)) combined = a.em_combined;
    const ip::ThresholdReport r = ip::orthogonality_threshold(
        a.em_base, a.em_q, a.em_s, ip::parse_direction(a.direction), combined);

    std::cout << "threshold=" << ip::fmt_double(r.threshold)
              << " (em_base=" << ip::fmt_double(r.em_base)
              << " err_q=" << ip::fmt_double(r.err_q)
              << " err_s=" << ip::fmt_double(r.err_s)
              << " direction=" << ip::direction_name(r.direction) << ")\n";
    if (r.em_combined)
        std::cout << "combined=" << ip::fmt_double(*r.em_combined) << " -> "
                  << (*r.beats ? "BEATS" : "VIOLATES") << " threshold\n";

    if (!a.json_out.empty()) {
        ordered_json config;
        config["em_base"] = a.em_base;
        config["em_q"] = a.em_q;
        config["em_s"] = a.em_s;
        config["direction"] = a.direction;
        if (combined) config["em_combined"] = *combined;
        ordered_json j = base_report("threshold", config);
        ordered_json rj;
        rj["threshold"] = r.threshold;
        rj["err_q"] = r.err_q;
        rj["err_s"] = r.err_s;
        if (r.beats) rj["beats"] = *r.beats;
        j["report"] = rj;
        write_json(a.json_out, j);
    }
    return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
    std::vector<std::string> presets, patterns, orders;
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "sweep-out";
    std::size_t count = 256, n = 64, blocks = 64;
    int jobs = 0;
};

int run_sweep(const SweepArgs& a) {
    struct Cell {
        std::string preset, pattern, order;
        std::uint64_t seed;
        ordered_json config;
        std::string hash;
        std::string file;
    };
    std::vector<Cell> cells;
    for (const auto& preset : a.presets)
        for (const auto& pattern : a.patterns)
            for (const auto& order : a.orders)
                for (std::uint64_t seed : a.seeds) {
                    Cell c{preset, pattern, order, seed, {}, {}, {}};
                    c.config["preset"] = preset;
                    c.config["pattern"] = pattern;
                    c.config["order"] = order;
                    c.config["seed"] = seed;
                    c.config["count"] = a.count;
                    c.config["n"] = a.n;
                    c.config["blocks"] = a.blocks;
                    c.hash = ip::config_hash(c.config);
                    c.file = "cell-" + c.hash + ".json";
                    cells.push_back(std::move(c));
                }

    std::filesystem::create_directories(a.out_dir);

    int jobs = a.jobs;
    if (jobs <= 0) {
        if (const char* env = std::getenv("COMPRESS_INTERPLAY_JOBS"))
            jobs = std::max(1, std::atoi(env));
        else
            jobs = static_cast<int>(
                std::max(1u, std::thread::hardware_concurrency()));
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size() || failed.load()) break;
            const Cell& c = cells[i];
            try {
                const ip::QuantFormat fmt = ip::preset(c.preset, a.n);
                const ip::SparsityPattern pat = ip::parse_pattern(c.pattern);
                const ip::Order ord = ip::parse_order(c.order);

                ip::DeviationConfig dc;
                dc.count = a.count;
                dc.n = a.n;
                dc.fmt = fmt;
                dc.pat = pat;
                dc.order = ord;
                dc.seed = {c.seed, 0};
                const ip::DeviationSummary dev = ip::deviation_experiment(dc);

                const ip::Tensor t = ip::gaussian_tensor(
                    {a.blocks, a.n}, a.n, {c.seed, 1u << 20});
                const ip::TensorAudit audit = ip::audit_tensor(t, fmt, pat, {1});

                ordered_json j = base_report("sweep-cell", c.config);
                j["audit"] = audit_summary_json(audit, audit.blocks.size());
                j["deviation"] = deviation_summary_json(dev);
                write_json((std::filesystem::path(a.out_dir) / c.file).string(), j);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                failed.store(true);
                error_message = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(
                                                             cells.empty() ? 1 : cells.size())));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::invalid_argument(error_message);

    ordered_json grid;
    grid["presets"] = a.presets;
    grid["patterns"] = a.patterns;
    grid["orders"] = a.orders;
    grid["seeds"] = a.seeds;
    grid["count"] = a.count;
    grid["n"] = a.n;
    grid["blocks"] = a.blocks;
    ordered_json manifest = base_report("sweep", grid);
    manifest["cells"] = ordered_json::array();
    for (const Cell& c : cells) {
        ordered_json cj;
        cj["preset"] = c.preset;
        cj["pattern"] = c.pattern;
        cj["order"] = c.order;
        cj["seed"] = c.seed;
        cj["config_hash"] = c.hash;
        cj["path"] = c.file;
        manifest["cells"].push_back(cj);
    }
    write_json((std::filesystem::path(a.out_dir) / "manifest.json").string(),
               manifest);
    std::cout << "cells=" << cells.size() << " out=" << a.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"max-scaled block quantization x magnitude sparsity toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from an INI/TOML file");

    QuantizeArgs qa;
    CLI::App* quantize = app.add_subcommand("quantize", "quantize a TNSR tensor");
    quantize->add_option("--input", qa.input)->required();
    quantize->add_option("--output", qa.output)->required();
    quantize->add_option("--preset", qa.preset);
    quantize->add_option("--block-size", qa.block_size);

    SparsifyArgs sa;
    CLI::App* sparsify = app.add_subcommand("sparsify", "prune a TNSR tensor");
    sparsify->add_option("--input", sa.input)->required();
    sparsify->add_option("--output", sa.output)->required();
    sparsify->add_option("--pattern", sa.pattern);
    sparsify->add_option("--tie", sa.tie)->check(CLI::IsMember({"earlier", "later"}));

    AuditTensorArgs ata;
    CLI::App* audit_tensor =
        app.add_subcommand("audit-tensor", "tensor-level orthogonality audit");
    audit_tensor->add_option("--input", ata.input);
    audit_tensor->add_option("--synthetic", ata.synthetic,
                             "Gaussian tensor dims, e.g. 1000x64");
    audit_tensor->add_option("--preset", ata.preset);
    audit_tensor->add_option("--pattern", ata.pattern);
    audit_tensor->add_option("--p", ata.p);
    audit_tensor->add_option("--block-size", ata.block_size);
    audit_tensor->add_option("--seed", ata.seed);
    audit_tensor->add_option("--stream", ata.stream);
    audit_tensor->add_option("--csv", ata.csv_out);
    audit_tensor->add_option("--json", ata.json_out);
    audit_tensor->add_flag("--strict", ata.strict);

    AuditDotArgs ada;
    CLI::App* audit_dot =
        app.add_subcommand("audit-dot", "dot-product error decomposition");
    audit_dot->add_option("--x", ada.x_path)->required();
    audit_dot->add_option("--w", ada.w_path)->required();
    audit_dot->add_option("--preset", ada.preset);
    audit_dot->add_option("--pattern", ada.pattern);
    audit_dot->add_option("--order", ada.order);
    audit_dot->add_option("--json", ada.json_out);

    DeviationArgs da;
    CLI::App* deviation =
        app.add_subcommand("deviation", "deviation statistic experiment");
    deviation->add_option("--count", da.count);
    deviation->add_option("--n", da.n);
    deviation->add_option("--preset", da.preset);
    deviation->add_option("--pattern", da.pattern);
    deviation->add_option("--order", da.order)
        ->check(CLI::IsMember({"sq", "qs", "both"}));
    deviation->add_option("--seed", da.seed);
    deviation->add_option("--stream", da.stream);
    deviation->add_option("--bin-edges", da.bin_edges);
    deviation->add_option("--csv", da.csv_out);
    deviation->add_option("--json", da.json_out);

    CollideArgs ca;
    CLI::App* collide = app.add_subcommand("collide", "unique-value collision report");
    collide->add_option("--input", ca.input);
    collide->add_option("--synthetic", ca.synthetic);
    collide->add_option("--preset", ca.preset);
    collide->add_option("--block-size", ca.block_size);
    collide->add_option("--seed", ca.seed);
    collide->add_option("--stream", ca.stream);
    collide->add_option("--csv", ca.csv_out);
    collide->add_option("--json", ca.json_out);

    PropagateArgs pa;
    CLI::App* propagate =
        app.add_subcommand("propagate", "synthetic layer-stack error transport");
    propagate->add_option("--depth", pa.depth);
    propagate->add_option("--width", pa.width);
    propagate->add_option("--batch", pa.batch);
    propagate->add_option("--activation", pa.activation)
        ->check(CLI::IsMember({"relu", "identity"}));
    propagate->add_option("--preset", pa.preset);
    propagate->add_option("--pattern", pa.pattern,
                          "optional; omit for quantization only");
    propagate->add_option("--order", pa.order)
        ->check(CLI::IsMember({"sq", "qs", "both"}));
    propagate->add_option("--block-size", pa.block_size);
    propagate->add_option("--compress-layers", pa.compress_layers,
                          "'all', 'none' or comma-separated indices");
    propagate->add_option("--seed", pa.seed);
    propagate->add_option("--seeds", pa.seeds, "number of consecutive seeds");
    propagate->add_option("--csv", pa.csv_out);
    propagate->add_option("--json", pa.json_out);

    ThresholdArgs ta;
    CLI::App* threshold =
        app.add_subcommand("threshold", "orthogonality threshold arithmetic");
    threshold->add_option("--em-base", ta.em_base)->required();
    threshold->add_option("--em-q", ta.em_q)->required();
    threshold->add_option("--em-s", ta.em_s)->required();
    threshold->add_option("--em-combined", ta.em_combined);
    threshold->add_option("--direction", ta.direction)
        ->check(CLI::IsMember({"lower", "higher"}));
    threshold->add_option("--json", ta.json_out);

    SweepArgs swa;
    CLI::App* sweep = app.add_subcommand("sweep", "grid of deviation+audit cells");
    sweep->add_option("--presets", swa.presets)->delimiter(',');
    sweep->add_option("--patterns", swa.patterns)->delimiter(',');
    sweep->add_option("--orders", swa.orders)->delimiter(',');
    sweep->add_option("--seeds", swa.seeds)->delimiter(',');
    sweep->add_option("--out", swa.out_dir);
    sweep->add_option("--count", swa.count);
    sweep->add_option("--n", swa.n);
    sweep->add_option("--blocks", swa.blocks);
    sweep->add_option("--jobs", swa.jobs,
                      "parallel cells (default: COMPRESS_INTERPLAY_JOBS or cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        if (quantize->parsed()) return run_quantize(qa);
        if (sparsify->parsed()) return run_sparsify(sa);
        if (audit_tensor->parsed()) return run_audit_tensor(ata);
        if (audit_dot->parsed()) return run_audit_dot(ada);
        if (deviation->parsed()) return run_deviation(da);
        if (collide->parsed()) return run_collide(ca);
        if (propagate->parsed()) return run_propagate(pa);
        if (threshold->parsed()) return run_threshold(ta);
        if (sweep->parsed()) return run_sweep(swa);
    } catch (const ip::TnsrError& e) {
        std::cerr << "error: " << e.field << ": " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 3;
}
