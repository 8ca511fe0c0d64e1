#include <doctest.h>

#include <cmath>

#include "seqpv/permutation.hpp"

using namespace seqpv;
using perm::PermutationDataset;

namespace {

const std::string kPlantCsv = std::string(SEQPV_SOURCE_DIR) + "/data/plant_growth.csv";

double stream_frequency(perm::PermutationStream& stream, int draws) {
    std::int64_t ones = 0;
    for (int i = 0; i < draws; ++i) ones += stream.next() ? 1 : 0;
    return static_cast<double>(ones) / draws;
}

}  // namespace

TEST_CASE("dataset validation") {
    CHECK_THROWS_AS(PermutationDataset({}, {1.0}), std::domain_error);
    CHECK_THROWS_AS(PermutationDataset({1.0}, {}), std::domain_error);
    CHECK_THROWS_AS(PermutationDataset({1.0, NAN}, {2.0}), std::domain_error);
    CHECK_THROWS_AS(PermutationDataset({1.0}, {INFINITY}), std::domain_error);
}

TEST_CASE("constant data ties everywhere") {
    PermutationDataset data({2.5, 2.5, 2.5}, {2.5, 2.5, 2.5});
    CHECK(perm::exact_permutation_pvalue(data) == 1.0);
    perm::PermutationStream stream(data, 3);
    for (int i = 0; i < 500; ++i) CHECK(stream.next());
}

TEST_CASE("two-vs-two split enumeration") {
    // only the identity split attains the maximal statistic: 1 of C(4,2)=6
    PermutationDataset data({0.0, 0.0}, {1.0, 1.0});
    const auto res = perm::exact_permutation_detail(data);
    CHECK(res.total_splits == 6);
    CHECK(res.exceed_count == 1);
    CHECK(res.p_value == doctest::Approx(1.0 / 6.0).epsilon(1e-15));

    perm::PermutationStream stream(data, 8);
    const double freq = stream_frequency(stream, 1000000);
    CHECK(std::fabs(freq - 1.0 / 6.0) < 0.005);
}

TEST_CASE("plant growth control vs second treatment: exact enumeration") {
    const auto data = perm::load_two_group_csv(kPlantCsv, "ctrl", "trt2");
    CHECK(data.group_a.size() == 10);
    CHECK(data.group_b.size() == 10);
    CHECK(data.exact_arithmetic());  // two-decimal weights scale to integers
    CHECK(data.observed_statistic() == doctest::Approx(0.494).epsilon(1e-12));

    const auto res = perm::exact_permutation_detail(data);
    CHECK(res.total_splits == 184756);
    CHECK(res.exceed_count == 4465);  // 81 of these splits tie the observed sum exactly
    CHECK(std::fabs(res.p_value - 0.02417) < 1e-5);
}

TEST_CASE("plant growth stream long-run frequency") {
    const auto data = perm::load_two_group_csv(kPlantCsv, "ctrl", "trt2");
    perm::PermutationStream stream(data, 424242);
    const double freq = stream_frequency(stream, 1000000);
    CHECK(std::fabs(freq - 0.02417) < 0.001);
}

TEST_CASE("stream frequency matches enumeration on inexact values") {
    // no decimal scaling here: the extended-precision fallback path
    PermutationDataset data({std::sqrt(2.0), std::exp(1.0), 1.0 / 3.0},
                            {M_PI, std::sqrt(3.0), std::log(7.0)});
    CHECK_FALSE(data.exact_arithmetic());
    const auto res = perm::exact_permutation_detail(data);
    CHECK(res.total_splits == 20);
    perm::PermutationStream stream(data, 77);
    const double freq = stream_frequency(stream, 1000000);
    CHECK(std::fabs(freq - res.p_value) < 0.005);
}

TEST_CASE("enumeration cap refuses oversized problems") {
    std::vector<double> a(15), b(15);
    for (int i = 0; i < 15; ++i) {
        a[static_cast<std::size_t>(i)] = i;
        b[static_cast<std::size_t>(i)] = i + 0.5;
    }
    PermutationDataset data(a, b);  // C(30,15) = 155117520
    CHECK_THROWS_AS(perm::exact_permutation_pvalue(data), std::domain_error);
    CHECK_NOTHROW(perm::exact_permutation_pvalue(data, 200000000ULL));
}

TEST_CASE("csv loader") {
    const auto data = perm::load_two_group_csv(kPlantCsv, "ctrl", "trt1");
    CHECK(data.group_a.size() == 10);
    CHECK(data.group_b.size() == 10);
    // three labels present: explicit selection is required
    CHECK_THROWS(perm::load_two_group_csv(kPlantCsv));
    CHECK_THROWS(perm::load_two_group_csv(kPlantCsv, "ctrl", "no_such_label"));
    CHECK_THROWS(perm::load_two_group_csv("/nonexistent/file.csv"));
}

TEST_CASE("permutation stream save and resume") {
    const auto data = perm::load_two_group_csv(kPlantCsv, "ctrl", "trt2");
    perm::PermutationStream a(data, 31);
    for (int i = 0; i < 123; ++i) a.next();
    const auto st = a.save_state();
    perm::PermutationStream b(st, data);
    for (int i = 0; i < 2000; ++i) CHECK(a.next() == b.next());

    const auto other = perm::load_two_group_csv(kPlantCsv, "ctrl", "trt1");
    CHECK_THROWS_AS(perm::PermutationStream(st, other), streams::StateMismatchError);
}
