#include <doctest.h>

#include <cmath>
#include <vector>

#include "seqpv/binomial.hpp"
#include "seqpv/rng.hpp"

using namespace seqpv;

namespace {

// Independent pmf route for the oracle: term recurrence from j=0 in long
// double, no log-gamma involved.
std::vector<long double> pmf_table(std::uint64_t n, long double p) {
    std::vector<long double> t(n + 1);
    t[0] = powl(1.0L - p, static_cast<long double>(n));
    for (std::uint64_t j = 0; j < n; ++j)
        t[j + 1] = t[j] * static_cast<long double>(n - j) /
                   (static_cast<long double>(j + 1)) * p / (1.0L - p);
    return t;
}

}  // namespace

TEST_CASE("log_choose small and boundary values") {
    CHECK(binom::log_choose(17, 0) == 0.0);
    CHECK(binom::log_choose(17, 17) == 0.0);
    CHECK(binom::log_choose(4, 2) == doctest::Approx(std::log(6.0)).epsilon(1e-13));
    // C(20,10) = 184756, the number of splits in the two-group yield example
    CHECK(binom::log_choose(20, 10) == doctest::Approx(std::log(184756.0)).epsilon(1e-13));
    CHECK_THROWS_AS(binom::log_choose(4, 5), std::domain_error);
}

TEST_CASE("log_choose relative accuracy at large n") {
    // Stirling-free check against the summed-log oracle
    long double direct = 0.0L;
    const std::uint64_t n = 200000, k = 77777;
    for (std::uint64_t i = 1; i <= k; ++i)
        direct += logl(static_cast<long double>(n - k + i)) - logl(static_cast<long double>(i));
    const double got = binom::log_choose(n, k);
    CHECK(std::fabs(got - static_cast<double>(direct)) <=
          1e-10 * std::max(1.0, std::fabs(static_cast<double>(direct))));
}

TEST_CASE("binomial pmf log matches the direct product route") {
    const auto table = pmf_table(1000, 0.06L);
    const double lp = binom::binomial_pmf_log(1000, 60, 0.06);
    CHECK(std::exp(lp) == doctest::Approx(static_cast<double>(table[60])).epsilon(1e-10));

    CHECK(binom::binomial_pmf_log(5, 0, 0.0) == 0.0);
    CHECK(binom::binomial_pmf_log(5, 3, 0.0) == -INFINITY);
    CHECK(binom::binomial_pmf_log(5, 5, 1.0) == 0.0);
    CHECK(binom::binomial_pmf_log(5, 3, 1.0) == -INFINITY);
    CHECK_THROWS_AS(binom::binomial_pmf_log(5, 6, 0.5), std::domain_error);
    CHECK_THROWS_AS(binom::binomial_pmf_log(5, 2, 1.5), std::domain_error);
}

TEST_CASE("binomial cdf against exact summation oracle") {
    const auto table = pmf_table(1000, 0.06L);
    long double acc = 0.0L;
    for (std::uint64_t k = 0; k <= 80; ++k) {
        acc += table[k];
        CHECK(binom::binomial_cdf(1000, k, 0.06) ==
              doctest::Approx(static_cast<double>(acc)).epsilon(1e-11));
    }
    // the fixed-sample risk computation behind the one-in-thirteen figure
    CHECK(binom::binomial_cdf(1000, 49, 0.06) == doctest::Approx(0.078).epsilon(0.013));
    CHECK(std::fabs(binom::binomial_cdf(1000, 49, 0.06) - 0.0779244992795) < 1e-10);
}

TEST_CASE("binomial cdf degenerate and boundary cases") {
    CHECK(binom::binomial_cdf(10, 10, 0.3) == 1.0);
    CHECK(binom::binomial_cdf(10, 4, 0.0) == 1.0);
    CHECK(binom::binomial_cdf(10, 4, 1.0) == 0.0);
    CHECK(binom::binomial_cdf(1, 0, 0.25) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK_THROWS_AS(binom::binomial_cdf(3, 4, 0.5), std::domain_error);
}

TEST_CASE("binomial pmf sums to one for n up to 1e4") {
    for (std::uint64_t n : {10ULL, 123ULL, 1000ULL, 10000ULL}) {
        for (double p : {0.002, 0.3, 0.5, 0.97}) {
            long double sum = 0.0L;
            for (std::uint64_t k = 0; k <= n; ++k)
                sum += expl(static_cast<long double>(binom::binomial_pmf_log(n, k, p)));
            CHECK(std::fabs(static_cast<double>(sum) - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("binomial cdf monotone in k and in p") {
    Xoshiro256ss rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const std::uint64_t n = 1 + rng.uniform_below(400);
        const double p = rng.uniform01();
        double prev = -1.0;
        for (std::uint64_t k = 0; k <= n; k += 1 + n / 17) {
            const double c = binom::binomial_cdf(n, k, p);
            CHECK(c >= prev - 1e-12);
            prev = c;
        }
        const std::uint64_t k = rng.uniform_below(n);  // k < n
        double prev_p = 2.0;
        for (double q = 0.05; q < 1.0; q += 0.1) {
            const double c = binom::binomial_cdf(n, k, q);
            CHECK(c <= prev_p + 1e-12);
            prev_p = c;
        }
    }
}

TEST_CASE("bisect_root basics") {
    auto linear = [](double x) { return x - 0.5; };
    CHECK(binom::bisect_root(linear, 0.0, 1.0, 1e-12) == doctest::Approx(0.5).epsilon(1e-11));

    auto quad = [](double x) { return x * x - 2.0; };
    CHECK(binom::bisect_root(quad, 0.0, 2.0, 1e-12) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-11));

    // the all-zero crossing equation at eps = 1e-5, n = 339
    auto g = [](double p) { return std::pow(1.0 - p, 339.0) - 1e-5 / 340.0; };
    const double root = binom::bisect_root(g, 0.0, 1.0, 1e-12);
    const double closed_form = 1.0 - std::pow(1e-5 / 340.0, 1.0 / 339.0);
    CHECK(root == doctest::Approx(closed_form).epsilon(1e-9));
    CHECK(root == doctest::Approx(0.049869525).epsilon(1e-6));
    CHECK(root < 0.05);

    CHECK_THROWS_AS(binom::bisect_root(linear, 0.6, 1.0, 1e-12), std::domain_error);
    CHECK_THROWS_AS(binom::bisect_root(linear, 0.0, 1.0, -1.0), std::domain_error);
}

TEST_CASE("bisect_root halves the bracket each iteration") {
    int evals = 0;
    auto f = [&](double x) {
        ++evals;
        return std::atan(x - 0.137);
    };
    const double lo = -1.0, hi = 2.0, tol = 1e-9;
    binom::bisect_root(f, lo, hi, tol);
    const int iterations = evals - 2;  // two endpoint evaluations
    const int budget = static_cast<int>(std::ceil(std::log2((hi - lo) / tol))) + 2;
    CHECK(iterations <= budget);
}

TEST_CASE("normal quantile") {
    CHECK(binom::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::fabs(binom::normal_quantile(0.975) - 1.959964) < 1e-6);
    CHECK(std::fabs(binom::normal_quantile(0.975) - 1.9599639845400545) < 1e-8);
    for (double q : {0.001, 0.0123, 0.2, 0.41, 0.77, 0.9995}) {
        CHECK(binom::normal_quantile(1.0 - q) ==
              doctest::Approx(-binom::normal_quantile(q)).epsilon(1e-9));
        // round trip through the cdf
        CHECK(binom::normal_cdf(binom::normal_quantile(q)) == doctest::Approx(q).epsilon(1e-10));
    }
    CHECK_THROWS_AS(binom::normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(binom::normal_quantile(1.0), std::domain_error);
}
