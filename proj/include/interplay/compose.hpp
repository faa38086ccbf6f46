#pragma once

#include "interplay/quantize.hpp"
#include "interplay/sparsify.hpp"
#include "interplay/tensor.hpp"

namespace interplay {

enum class Order { SThenQ, QThenS };

const char* order_name(Order o);  // "sq" / "qs"
Order parse_order(std::string_view text);

// Error accounting of a composed transform c = q∘s or s∘q on one block.
// eps_q and eps_s are the errors of each transformation applied alone to
// the original input (what every theorem statement compares against), and
// eps_correction is the residual making
//     eps_composition = eps_q + eps_s + eps_correction
// hold exactly.
struct CompositionResult {
    Block output;
    Block eps_composition;
    Block eps_q;
    Block eps_s;
    Block eps_correction;
};

CompositionResult compose(std::span<const double> v, const QuantFormat& f,
                          const SparsityPattern& pat, Order ord);

Block correction_vector(std::span<const double> v, const QuantFormat& f,
                        const SparsityPattern& pat, Order ord);

// Tensor-level composition: quantization is per block; unstructured
// sparsity is global (computed on the original tensor for S->Q and on the
// quantized tensor for Q->S).
Tensor compose_tensor(const Tensor& t, const QuantFormat& f,
                      const SparsityPattern& pat, Order ord);

}  // namespace interplay
