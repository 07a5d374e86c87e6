#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "thir/math.hpp"
#include "thir/rng.hpp"

using namespace thir;

TEST_CASE("split rng streams are deterministic and distinct") {
    SplitRng a(42, 1, 2, 3);
    SplitRng b(42, 1, 2, 3);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    SplitRng c(42, 1, 2, 4);
    bool differs = false;
    SplitRng a2(42, 1, 2, 3);
    for (int i = 0; i < 16; ++i) differs |= a2.next_u64() != c.next_u64();
    REQUIRE(differs);
}

TEST_CASE("uniform doubles live in [0,1) and gaussians have sane moments") {
    SplitRng rng(7);
    double sum = 0.0;
    double sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double g = rng.next_gaussian();
        sum += g;
        sum2 += g * g;
    }
    REQUIRE(std::abs(sum / n) < 0.02);
    REQUIRE(std::abs(sum2 / n - 1.0) < 0.03);
}

TEST_CASE("next_int is in range and covers all values") {
    SplitRng rng(9);
    std::vector<int> seen(7, 0);
    for (int i = 0; i < 1000; ++i) {
        const int v = rng.next_int(7);
        REQUIRE(v >= 0);
        REQUIRE(v < 7);
        ++seen[static_cast<std::size_t>(v)];
    }
    for (int count : seen) REQUIRE(count > 0);
}

TEST_CASE("streaming log-sum-exp matches direct evaluation") {
    SplitRng rng(11);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> terms(static_cast<std::size_t>(1 + rng.next_int(12)));
        for (double& x : terms) x = (rng.next_double() - 0.5) * 80.0;
        double direct = 0.0;
        for (double x : terms) direct += std::exp(x);
        REQUIRE(log_sum_exp(terms) ==
                Catch::Approx(std::log(direct)).epsilon(1e-12));
    }
}

TEST_CASE("log-sum-exp survives extreme magnitudes and -inf terms") {
    LogSumExp acc;
    acc.add(-std::numeric_limits<double>::infinity());
    acc.add(1000.0);
    acc.add(1000.0);
    REQUIRE(acc.value() == Catch::Approx(1000.0 + std::log(2.0)));

    LogSumExp empty;
    REQUIRE(empty.value() == -std::numeric_limits<double>::infinity());
}

TEST_CASE("q function reference values") {
    REQUIRE(q_function(0.0) == Catch::Approx(0.5));
    REQUIRE(q_function(1.0) == Catch::Approx(0.158655253931).epsilon(1e-9));
    REQUIRE(q_function(3.09) == Catch::Approx(1.0010e-3).epsilon(1e-3));
    // BPSK at Eb/N0 = 4 dB.
    REQUIRE(q_function(std::sqrt(2.0 * db_to_power(4.0))) ==
            Catch::Approx(1.2501e-2).epsilon(1e-3));
}

TEST_CASE("ber curve interpolation helpers") {
    const std::vector<double> snr{0, 2, 4, 6};
    const std::vector<double> ber{1e-1, 1e-2, 1e-3, 1e-4};
    REQUIRE(snr_at_ber(snr, ber, 1e-2) == Catch::Approx(2.0));
    REQUIRE(snr_at_ber(snr, ber, 3e-3) == Catch::Approx(3.0).margin(0.2));
    REQUIRE(std::isnan(snr_at_ber(snr, ber, 1e-9)));
    REQUIRE(ber_at_snr(snr, ber, 3.0) == Catch::Approx(3.16227766e-3).epsilon(1e-6));
    REQUIRE(ber_at_snr(snr, ber, -1.0) == Catch::Approx(1e-1));
}
