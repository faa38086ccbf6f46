#include "interplay/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace interplay {

namespace {

// Largest e with 2^e <= x; exact at powers of two.
int floor_log2(double x) {
    int exp = 0;
    (void)std::frexp(x, &exp);  // x = f * 2^exp, f in [0.5, 1)
    return exp - 1;
}

// Smallest e with x <= 2^e (literal ceiling of log2).
int ceil_log2(double x) {
    int exp = 0;
    const double f = std::frexp(x, &exp);
    return f == 0.5 ? exp - 1 : exp;
}

// Shared power-of-two exponent for the integer-mantissa families. Floor is
// the literal binade [2^e, 2^(e+1)). Ceil maps scale in [2^(e-1), 2^e) to e;
// this equals ceil(log2(scale)) except at exact powers of two, where the
// literal ceiling would put the re-quantized maximum back on a clamping
// grid and break idempotence.
int grid_exponent(double scale, ExponentMode mode) {
    int exp = 0;
    (void)std::frexp(scale, &exp);
    return mode == ExponentMode::Floor ? exp - 1 : exp;
}

double round_half_away(double x) { return std::round(x); }

long long clamp_index(double k, const QuantFormat& f) {
    if (k <= static_cast<double>(f.clamp_lo)) return f.clamp_lo;
    if (k >= static_cast<double>(f.clamp_hi)) return f.clamp_hi;
    return static_cast<long long>(k);
}

void validate_format(const QuantFormat& f) {
    if (!(f.clamp_lo < 0 && 0 < f.clamp_hi))
        throw std::invalid_argument("mantissa_clamp: requires lo < 0 < hi");
    if (f.family == QuantFamily::MxFp) {
        if (!f.mxfp) throw std::invalid_argument("mxfp_config: required for MXFP");
        const MxfpConfig& c = *f.mxfp;
        if (c.exponent_bits < 1 || c.exponent_bits > 11)
            throw std::invalid_argument("mxfp_config: exponent_bits out of range");
        if (c.mantissa_bits < 1 || c.mantissa_bits > 32)
            throw std::invalid_argument("mxfp_config: mantissa_bits out of range");
        if (c.e_max() < c.e_min())
            throw std::invalid_argument("mxfp_config: bias leaves no normal range");
    } else if (f.mantissa_bits < 2) {
        throw std::invalid_argument("m: must be >= 2 for INT/HBFP/MXINT");
    }
}

// Round |xs| onto the element FP grid: subnormals below 2^E_min with
// spacing 2^(E_min - M), saturation at the largest finite magnitude.
double mxfp_round_mag(double a, const MxfpConfig& c) {
    const int m = c.mantissa_bits;
    const double max_fin = c.max_finite();
    if (a >= max_fin) return max_fin;
    const double min_normal = std::ldexp(1.0, c.e_min());
    if (a < min_normal) {
        const double k = round_half_away(std::scalbn(a, m - c.e_min()));
        return std::scalbn(k, c.e_min() - m);
    }
    int e = floor_log2(a);
    const double frac = std::scalbn(a, -e);  // [1, 2)
    double mant = round_half_away(std::scalbn(frac - 1.0, m));
    if (mant == std::ldexp(1.0, m)) {
        mant = 0.0;
        ++e;
        if (e > c.e_max()) return max_fin;
    }
    return std::scalbn(1.0 + std::scalbn(mant, -m), e);
}

Block quantize_int_grid(std::span<const double> b, const QuantFormat& f,
                        double scale) {
    Block out(b.size());
    double s = 0;
    if (f.family == QuantFamily::Int) {
        s = scale / static_cast<double>(f.clamp_hi);
    } else {
        const int e = grid_exponent(scale, f.exponent_mode);
        s = std::ldexp(1.0, e - (f.mantissa_bits - 1));
    }
    if (s <= 0.0 || !std::isfinite(s)) return out;  // spacing underflowed
    for (std::size_t i = 0; i < b.size(); ++i) {
        const long long k = clamp_index(round_half_away(b[i] / s), f);
        if (f.family == QuantFamily::Int && k == f.clamp_hi) {
            // The positive grid top is the scale itself; snapping keeps the
            // max-magnitude element exact and re-quantization stable.
            out[i] = scale;
        } else if (f.family == QuantFamily::Int && k == -f.clamp_hi) {
            out[i] = -scale;
        } else {
            out[i] = static_cast<double>(k) * s;
        }
    }
    return out;
}

Block quantize_mxfp(std::span<const double> b, const QuantFormat& f,
                    double scale) {
    const MxfpConfig& c = *f.mxfp;
    const int pot = f.exponent_mode == ExponentMode::Floor ? floor_log2(scale)
                                                           : ceil_log2(scale);
    Block out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double xs = std::scalbn(b[i], -pot);
        if (xs == 0.0) {
            out[i] = 0.0;
            continue;
        }
        const double mag = mxfp_round_mag(std::fabs(xs), c);
        const double vs = xs < 0 ? -mag : mag;
        out[i] = mag == 0.0 ? 0.0 : std::scalbn(vs, pot);
    }
    return out;
}

}  // namespace

double MxfpConfig::max_finite() const {
    return std::ldexp(2.0 - std::ldexp(1.0, -mantissa_bits), e_max());
}

double block_scale(std::span<const double> b) {
    if (b.empty()) throw std::invalid_argument("b: empty block");
    require_finite(b, "b");
    double m = 0;
    for (double x : b) m = std::max(m, std::fabs(x));
    return m;
}

Block quantize_block(std::span<const double> b, const QuantFormat& f) {
    validate_format(f);
    const double scale = block_scale(b);
    if (scale == 0.0) return Block(b.size(), 0.0);
    if (f.family == QuantFamily::MxFp) return quantize_mxfp(b, f, scale);
    return quantize_int_grid(b, f, scale);
}

Block quant_error(std::span<const double> b, const QuantFormat& f) {
    Block q = quantize_block(b, f);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = b[i] - q[i];
    return q;
}

double step_bound(const QuantFormat& f, double scale) {
    validate_format(f);
    if (!(scale >= 0) || !std::isfinite(scale))
        throw std::invalid_argument("scale: must be finite and >= 0");
    if (scale == 0.0) return 0.0;

    if (f.family == QuantFamily::MxFp) {
        const MxfpConfig& c = *f.mxfp;
        const int pot = f.exponent_mode == ExponentMode::Floor
                            ? floor_log2(scale)
                            : ceil_log2(scale);
        const double top = std::scalbn(scale, -pot);  // max reachable |xs|
        const int m = c.mantissa_bits;
        double step_s;
        if (top > c.max_finite()) {
            step_s = std::max(top - c.max_finite(),
                              std::ldexp(1.0, c.e_max() - m - 1));
        } else if (top < std::ldexp(1.0, c.e_min())) {
            step_s = std::ldexp(1.0, c.e_min() - m - 1);
        } else {
            step_s = std::ldexp(1.0, floor_log2(top) - m - 1);
        }
        return std::scalbn(step_s, pot);
    }

    double s;
    if (f.family == QuantFamily::Int) {
        s = scale / static_cast<double>(f.clamp_hi);
    } else {
        const int e = grid_exponent(scale, f.exponent_mode);
        s = std::ldexp(1.0, e - (f.mantissa_bits - 1));
    }
    const long long reach = std::min<long long>(f.clamp_hi, -f.clamp_lo);
    const double top = static_cast<double>(reach) * s;
    double step = 0.5 * s;
    if (scale > top) step = std::max(step, scale - top);
    return step;
}

Tensor quantize_tensor(const Tensor& t, const QuantFormat& f,
                       bool allow_ragged) {
    t.validate(allow_ragged);
    Tensor out = t;
    const std::size_t blocks = t.block_count(allow_ragged);
    for (std::size_t i = 0; i < blocks; ++i) {
        Block q = quantize_block(t.block(i), f);
        auto dst = out.block(i);
        std::copy(q.begin(), q.end(), dst.begin());
    }
    return out;
}

namespace {

QuantFormat make_int(int m, std::size_t bs, std::string name) {
    QuantFormat f;
    f.family = QuantFamily::Int;
    f.mantissa_bits = m;
    f.clamp_hi = (1LL << (m - 1)) - 1;
    f.clamp_lo = -f.clamp_hi;
    f.block_size = bs;
    f.name = std::move(name);
    return f;
}

QuantFormat make_hbfp(int m, ExponentMode mode, long long clamp,
                      std::size_t bs, std::string name,
                      QuantFamily family = QuantFamily::Hbfp) {
    QuantFormat f;
    f.family = family;
    f.mantissa_bits = m;
    f.exponent_mode = mode;
    f.clamp_hi = clamp;
    f.clamp_lo = -clamp;
    f.block_size = bs;
    f.name = std::move(name);
    return f;
}

QuantFormat make_mxfp(MxfpConfig cfg, std::size_t bs, std::string name) {
    QuantFormat f;
    f.family = QuantFamily::MxFp;
    f.mantissa_bits = cfg.mantissa_bits;
    f.exponent_mode = ExponentMode::Ceil;
    f.mxfp = cfg;
    f.block_size = bs;
    f.name = std::move(name);
    return f;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "INT8",           "INT4",           "HBFP8-appendix",
        "HBFP6-appendix", "HBFP4-appendix", "HBFP8-paper",
        "HBFP6-paper",    "HBFP4-paper",    "MXINT8",
        "MXFP8",          "MXFP6",
    };
    return names;
}

QuantFormat preset(std::string_view name, std::size_t block_size) {
    if (block_size == 0) throw std::invalid_argument("block_size: must be positive");
    const std::string n(name);
    if (n == "INT8") return make_int(8, block_size, n);
    if (n == "INT4") return make_int(4, block_size, n);
    // -appendix: ceil exponent, two's-complement-symmetric clamp.
    // -paper: floor exponent (reproduces the worked examples); the clamp
    // 2^m - 1 admits every in-binade mantissa without letting the maximum
    // escape its binade, which keeps quantization exactly idempotent.
    for (int m : {8, 6, 4}) {
        if (n == "HBFP" + std::to_string(m) + "-appendix")
            return make_hbfp(m, ExponentMode::Ceil, (1LL << (m - 1)) - 1,
                             block_size, n);
        if (n == "HBFP" + std::to_string(m) + "-paper")
            return make_hbfp(m, ExponentMode::Floor, (1LL << m) - 1,
                             block_size, n);
    }
    if (n == "MXINT8")
        return make_hbfp(8, ExponentMode::Ceil, 127, block_size, n,
                         QuantFamily::MxInt);
    if (n == "MXFP8") return make_mxfp({4, 3, 7}, block_size, n);  // E4M3
    if (n == "MXFP6") return make_mxfp({2, 3, 1}, block_size, n);  // E2M3
    std::string msg = "preset: unknown name '" + n + "' (valid:";
    for (const auto& p : preset_names()) msg += " " + p;
    msg += ")";
    throw std::invalid_argument(msg);
}

}  // namespace interplay
