#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "interplay/tensor.hpp"

using namespace interplay;

TEST_CASE("lp_norm worked values") {
    // Thm 3.6 proof: ||eps_s|| of block (3.9, 4.0)
    CHECK(lp_norm(std::vector<double>{3.9, 0.0}, {1}) == doctest::Approx(3.9).epsilon(1e-15));
    CHECK(lp_norm(std::vector<double>{0, 0, 0}, {2}) == 0.0);
    CHECK(lp_norm(std::vector<double>{1, -2, 2}, {2}) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("lp_norm rejects bad input") {
    CHECK_THROWS_AS(lp_norm(std::vector<double>{}, {2}), std::invalid_argument);
    CHECK_THROWS_AS(lp_norm(std::vector<double>{1.0}, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS(lp_norm(std::vector<double>{1.0}, {std::nan("")}), std::invalid_argument);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(lp_norm(std::vector<double>{inf}, {2}), std::invalid_argument);
}

TEST_CASE("lp_norm triangle inequality and permutation invariance") {
    std::mt19937_64 eng(7);
    std::normal_distribution<double> dist;
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
        for (int it = 0; it < 2500; ++it) {
            std::vector<double> a(16), b(16), sum(16);
            for (int i = 0; i < 16; ++i) {
                a[i] = dist(eng);
                b[i] = dist(eng);
                sum[i] = a[i] + b[i];
            }
            const double na = lp_norm(a, {p});
            const double nb = lp_norm(b, {p});
            CHECK(lp_norm(sum, {p}) <= na + nb + 1e-9);

            std::vector<double> shuffled = a;
            std::shuffle(shuffled.begin(), shuffled.end(), eng);
            CHECK(lp_norm(shuffled, {p}) == doctest::Approx(na).epsilon(1e-12));
        }
    }
}

TEST_CASE("tensor block partition") {
    Tensor t = make_tensor({2, 8}, std::vector<double>(16, 1.0), 4);
    CHECK(t.block_count() == 4);
    CHECK(t.block(3).size() == 4);

    Tensor ragged = make_tensor({5}, std::vector<double>(5, 0.0), 4);
    CHECK_THROWS_AS(ragged.block_count(), std::invalid_argument);
    CHECK(ragged.block_count(true) == 2);
    CHECK(ragged.block(1).size() == 1);

    CHECK_THROWS_AS(make_tensor({3, 2}, std::vector<double>(5, 0.0), 4),
                    std::invalid_argument);
}
