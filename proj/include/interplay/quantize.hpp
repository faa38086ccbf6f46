#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "interplay/tensor.hpp"

namespace interplay {

enum class QuantFamily { Int, Hbfp, MxInt, MxFp };
enum class ExponentMode { Floor, Ceil };

// Element format for the MxFp family: exponent/mantissa bit widths and
// exponent bias. E_min = 1 - bias, E_max = 2^E_bits - 1 - bias; values
// below 2^E_min flush through a subnormal grid with spacing 2^(E_min - M),
// values above the largest finite magnitude saturate to it.
struct MxfpConfig {
    int exponent_bits = 4;
    int mantissa_bits = 3;
    int bias = 7;

    int e_min() const { return 1 - bias; }
    int e_max() const { return (1 << exponent_bits) - 1 - bias; }
    double max_finite() const;
};

struct QuantFormat {
    QuantFamily family = QuantFamily::Int;
    int mantissa_bits = 8;  // m
    // How log2(scale) is discretized into the shared power-of-two exponent
    // (Hbfp/MxInt/MxFp only; Int derives its spacing from scale directly).
    ExponentMode exponent_mode = ExponentMode::Floor;
    // Clamp range for the quantized integer grid index (Int/Hbfp/MxInt).
    long long clamp_lo = -127;
    long long clamp_hi = 127;
    std::optional<MxfpConfig> mxfp;
    std::size_t block_size = 64;
    std::string name;  // preset name when resolved from the table
};

// Fixed preset table; names are stable CLI-facing strings:
//   INT8, INT4,
//   HBFP8-appendix, HBFP6-appendix, HBFP4-appendix,
//   HBFP8-paper,   HBFP6-paper,   HBFP4-paper,
//   MXINT8, MXFP8, MXFP6
// Throws std::invalid_argument (listing valid names) for anything else.
QuantFormat preset(std::string_view name, std::size_t block_size = 64);
const std::vector<std::string>& preset_names();

// max(|x_1|, ..., |x_n|). Rejects empty/non-finite blocks.
double block_scale(std::span<const double> b);

// Max-scaled block quantization. All-zero blocks map to all-zero output.
// Exactly idempotent for every preset format.
Block quantize_block(std::span<const double> b, const QuantFormat& f);

// b - quantize_block(b), elementwise.
Block quant_error(std::span<const double> b, const QuantFormat& f);

// Least upper bound on a single element's quantization-error magnitude for
// blocks with the given scale (includes clamp-induced saturation error).
double step_bound(const QuantFormat& f, double scale);

// Per-block quantization of a whole tensor.
Tensor quantize_tensor(const Tensor& t, const QuantFormat& f,
                       bool allow_ragged = false);

}  // namespace interplay
