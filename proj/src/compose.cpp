#include "interplay/compose.hpp"

#include <stdexcept>

namespace interplay {

const char* order_name(Order o) {
    return o == Order::SThenQ ? "sq" : "qs";
}

Order parse_order(std::string_view text) {
    if (text == "sq" || text == "s-then-q" || text == "SQ") return Order::SThenQ;
    if (text == "qs" || text == "q-then-s" || text == "QS") return Order::QThenS;
    throw std::invalid_argument("order: expected 'sq' or 'qs', got '" +
                                std::string(text) + "'");
}

namespace {

Block subtract(std::span<const double> a, std::span<const double> b) {
    Block out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

CompositionResult build_result(std::span<const double> v, Block composed,
                               std::span<const double> q_alone,
                               std::span<const double> s_alone) {
    CompositionResult r;
    r.eps_composition = subtract(v, composed);
    r.eps_q = subtract(v, q_alone);
    r.eps_s = subtract(v, s_alone);
    r.eps_correction.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        r.eps_correction[i] = r.eps_composition[i] - r.eps_q[i] - r.eps_s[i];
    r.output = std::move(composed);
    return r;
}

}  // namespace

CompositionResult compose(std::span<const double> v, const QuantFormat& f,
                          const SparsityPattern& pat, Order ord) {
    const Block q_alone = quantize_block(v, f);
    const auto [s_alone, s_mask] = sparsify(v, pat);
    Block composed;
    if (ord == Order::SThenQ) {
        composed = quantize_block(s_alone, f);
    } else {
        composed = sparsify(q_alone, pat).first;
    }
    return build_result(v, std::move(composed), q_alone, s_alone);
}

Block correction_vector(std::span<const double> v, const QuantFormat& f,
                        const SparsityPattern& pat, Order ord) {
    return compose(v, f, pat, ord).eps_correction;
}

Tensor compose_tensor(const Tensor& t, const QuantFormat& f,
                      const SparsityPattern& pat, Order ord) {
    t.validate();
    Tensor out = t;
    if (ord == Order::SThenQ) {
        Tensor sparse = sparsify_tensor(t, pat);
        out = quantize_tensor(sparse, f);
    } else {
        Tensor quant = quantize_tensor(t, f);
        out = sparsify_tensor(quant, pat);
    }
    return out;
}

}  // namespace interplay
