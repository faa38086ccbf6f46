#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "interplay/quantize.hpp"
#include "interplay/rng.hpp"

using namespace interplay;

namespace {

const char* kAllPresets[] = {
    "INT8",        "INT4",        "HBFP8-appendix", "HBFP6-appendix",
    "HBFP4-appendix", "HBFP8-paper", "HBFP6-paper",    "HBFP4-paper",
    "MXINT8",      "MXFP8",       "MXFP6",
};

// Independent grid spacing for the integer-mantissa families, derived from
// the format definition rather than the quantizer internals.
double oracle_spacing(const QuantFormat& f, double scale) {
    if (f.family == QuantFamily::Int)
        return scale / static_cast<double>(f.clamp_hi);
    int exp = 0;
    (void)std::frexp(scale, &exp);
    const int e = f.exponent_mode == ExponentMode::Floor ? exp - 1 : exp;
    return std::ldexp(1.0, e - (f.mantissa_bits - 1));
}

}  // namespace

TEST_CASE("block_scale worked values") {
    CHECK(block_scale(std::vector<double>{3.9, 4.0}) == 4.0);
    CHECK(block_scale(std::vector<double>{0.0, 0.0}) == 0.0);
    CHECK(block_scale(std::vector<double>{0.6, 1.3}) == 1.3);
    CHECK_THROWS_AS(block_scale(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("INT4 worked example (3.9, 4.0)") {
    const QuantFormat f = preset("INT4", 2);
    const Block q = quantize_block(std::vector<double>{3.9, 4.0}, f);
    // scale=4.0, s=4/7, round(6.825)=7 -> 4.0
    CHECK(q[0] == 4.0);
    CHECK(q[1] == 4.0);
    const Block e = quant_error(std::vector<double>{3.9, 4.0}, f);
    CHECK(e[0] == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(e[1] == 0.0);
}

TEST_CASE("HBFP4 worked examples") {
    const QuantFormat paper = preset("HBFP4-paper", 2);
    const Block qw = quantize_block(std::vector<double>{0.6, 1.3}, paper);
    CHECK(qw[0] == 0.625);
    CHECK(qw[1] == 1.25);
    const Block ew = quant_error(std::vector<double>{0.6, 1.3}, paper);
    CHECK(ew[0] == doctest::Approx(-0.025).epsilon(1e-12));
    CHECK(ew[1] == doctest::Approx(0.05).epsilon(1e-12));

    // All four inputs already sit on the s = 0.125 grid.
    const QuantFormat paper4 = preset("HBFP4-paper", 4);
    const std::vector<double> grid = {1.0, 0.5, -0.25, 0.0};
    CHECK(quantize_block(grid, paper4) == Block(grid));

    // The ceil-exponent variant lands on the coarser 0.25 grid.
    const QuantFormat appendix = preset("HBFP4-appendix", 2);
    const Block qa = quantize_block(std::vector<double>{0.6, 1.3}, appendix);
    CHECK(qa[0] == 0.5);
    CHECK(qa[1] == 1.25);

    // Thm 3.5 equality block quantizes to (4.0, 4.0) under both variants.
    for (const char* name : {"HBFP4-paper", "HBFP4-appendix"}) {
        const Block q45 = quantize_block(std::vector<double>{4.0, 4.1},
                                         preset(name, 2));
        CHECK(q45[0] == 4.0);
        CHECK(q45[1] == 4.0);
    }
}

TEST_CASE("quantize rejects non-finite blocks") {
    const QuantFormat f = preset("INT8", 2);
    CHECK_THROWS_AS(
        quantize_block(std::vector<double>{1.0, std::nan("")}, f),
        std::invalid_argument);
    CHECK_THROWS_AS(
        quantize_block(
            std::vector<double>{1.0, std::numeric_limits<double>::infinity()}, f),
        std::invalid_argument);
}

TEST_CASE("step_bound worked values") {
    CHECK(step_bound(preset("INT4"), 4.0) ==
          doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    for (const char* name : kAllPresets) CHECK(step_bound(preset(name), 0.0) == 0.0);
    CHECK(step_bound(preset("HBFP4-paper"), 1.3) == 0.0625);
}

TEST_CASE("step_bound exhaustive oracle, HBFP4-paper at scale 1.3") {
    const QuantFormat f = preset("HBFP4-paper", 2);
    const double step = step_bound(f, 1.3);
    for (int i = -2600; i <= 2600; ++i) {
        const double x = i * 5e-4;  // fine grid over [-1.3, 1.3]
        const Block e = quant_error(std::vector<double>{x, 1.3}, f);
        CHECK(std::fabs(e[0]) <= step + 1e-15);
        CHECK(std::fabs(e[1]) <= step + 1e-15);
    }
}

TEST_CASE("error bound property across presets") {
    constexpr std::size_t kBlocks = 100000;
    constexpr std::size_t kN = 16;
    std::vector<double> pool(kBlocks * kN);
    GaussianStream g({77, 0});
    g.fill(pool);
    for (const char* name : kAllPresets) {
        const QuantFormat f = preset(name, kN);
        double worst = -1.0;
        for (std::size_t s = 0; s < kBlocks; ++s) {
            const std::span<const double> b(pool.data() + s * kN, kN);
            const double step = step_bound(f, block_scale(b));
            const Block e = quant_error(b, f);
            for (double v : e) worst = std::max(worst, std::fabs(v) - step);
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("idempotence is exact for every preset") {
    constexpr std::size_t kBlocks = 10000;
    constexpr std::size_t kN = 16;
    std::vector<double> pool(kBlocks * kN);
    GaussianStream g({5, 0});
    g.fill(pool);
    for (const char* name : kAllPresets) {
        const QuantFormat f = preset(name, kN);
        std::size_t mismatched = 0;
        for (std::size_t s = 0; s < kBlocks; ++s) {
            const std::span<const double> b(pool.data() + s * kN, kN);
            const Block q1 = quantize_block(b, f);
            const Block q2 = quantize_block(q1, f);
            if (q1 != q2) ++mismatched;
        }
        CHECK(mismatched == 0);
    }
}

TEST_CASE("zero and sign preservation; INT max quantizes exactly") {
    for (const char* name : kAllPresets) {
        const QuantFormat f = preset(name, 16);
        CHECK(quantize_block(Block(16, 0.0), f) == Block(16, 0.0));
        for (std::uint64_t s = 0; s < 2000; ++s) {
            Block b = gaussian_block(16, {13, s});
            b[3] = 0.0;
            const Block q = quantize_block(b, f);
            CHECK(q[3] == 0.0);
            for (std::size_t i = 0; i < b.size(); ++i) {
                if (q[i] != 0.0) CHECK(std::signbit(q[i]) == std::signbit(b[i]));
            }
            if (f.family == QuantFamily::Int) {
                const double scale = block_scale(b);
                bool max_exact = false;
                for (std::size_t i = 0; i < b.size(); ++i)
                    if (std::fabs(b[i]) == scale && q[i] == b[i]) max_exact = true;
                CHECK(max_exact);
            }
        }
    }
}

TEST_CASE("outputs lie on the declared grid") {
    for (const char* name : {"INT8", "INT4", "HBFP6-appendix", "HBFP6-paper",
                             "MXINT8"}) {
        const QuantFormat f = preset(name, 16);
        for (std::uint64_t s = 0; s < 2000; ++s) {
            const Block b = gaussian_block(16, {21, s});
            const double spacing = oracle_spacing(f, block_scale(b));
            const Block q = quantize_block(b, f);
            for (double v : q) {
                const double k = v / spacing;
                CHECK(std::fabs(k - std::round(k)) <= 1e-6);
                CHECK(std::fabs(std::round(k)) <=
                      static_cast<double>(f.clamp_hi));
            }
        }
    }
}

TEST_CASE("preset table") {
    CHECK(preset_names().size() == 11);
    for (const auto& name : preset_names()) CHECK(preset(name).name == name);
    CHECK_THROWS_AS(preset("HBFP6"), std::invalid_argument);
    CHECK_THROWS_AS(preset("INT8", 0), std::invalid_argument);
    CHECK(preset("MXFP8").mxfp->bias == 7);
    CHECK(preset("MXFP6").mxfp->exponent_bits == 2);
    CHECK(preset("MXFP6").mxfp->bias == 1);
}

TEST_CASE("MXFP saturation and subnormal flush") {
    // E2M1 with floor scaling makes x_s reach toward 2; max finite is 3.0
    // only for E1M1... build a config where saturation actually binds.
    QuantFormat f = preset("MXFP6", 4);
    f.mxfp = MxfpConfig{1, 1, 1};  // E1M1: e_min 0, e_max 0, max finite 1.5
    f.mantissa_bits = 1;
    f.exponent_mode = ExponentMode::Floor;  // x_s in [1, 2)
    const Block b{1.9, 1.0, 0.2, -1.9};
    const Block q = quantize_block(b, f);
    // scale 1.9 -> pot 0; 1.9 saturates to 1.5, 0.2 rounds on the 0.5 grid
    CHECK(q[0] == 1.5);
    CHECK(q[1] == 1.0);
    CHECK(q[2] == 0.0);
    CHECK(q[3] == -1.5);
    const double step = step_bound(f, 1.9);
    CHECK(step >= 1.9 - 1.5);
    for (std::size_t i = 0; i < b.size(); ++i)
        CHECK(std::fabs(b[i] - q[i]) <= step + 1e-15);
}
