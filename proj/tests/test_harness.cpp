#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "seqpv/binomial.hpp"
#include "seqpv/harness.hpp"

using namespace seqpv;
using harness::ExperimentConfig;
using harness::RunRecord;

namespace {

const std::string kPlantCsv = std::string(SEQPV_SOURCE_DIR) + "/data/plant_growth.csv";

}  // namespace

TEST_CASE("fixed-sample risk values") {
    const double risk = harness::fixed_sample_risk(0.06, 1000, 0.05);
    CHECK(risk >= 0.077);
    CHECK(risk <= 0.079);
    // identical to the cdf at the cutoff floor(0.05 * 1001) - 1 = 49
    CHECK(risk == binom::binomial_cdf(1000, 49, 0.06));

    CHECK(harness::fixed_sample_risk(0.0, 1000, 0.05) == 1.0);
    CHECK(harness::fixed_sample_risk(0.5, 1000, 0.05) < 1e-100);
    // alpha below 1/(m+1): the biased estimate can never fall that low
    CHECK(harness::fixed_sample_risk(0.01, 10, 0.05) == 0.0);
    // analytic: repeated evaluation is bit-identical and consumes no generator
    CHECK(harness::fixed_sample_risk(0.06, 1000, 0.05) == risk);
    CHECK_THROWS_AS(harness::fixed_sample_risk(0.06, 0, 0.05), std::domain_error);
}

TEST_CASE("all-zero thresholds at the recommended tuning") {
    const auto t = harness::all_zero_thresholds(1e-5, 0.05);
    CHECK(t.cp_min_m == 225);
    CHECK(t.anytime_first_n == 339);
    CHECK(std::fabs(t.cp_epsilon_at_30 - 0.215) <= 0.001);
}

TEST_CASE("all-zero thresholds degenerate at alpha one") {
    const auto t = harness::all_zero_thresholds(1e-5, 1.0);
    CHECK(t.cp_min_m == 1);
    CHECK(t.anytime_first_n == 1);
}

TEST_CASE("ros audit bands") {
    std::vector<RunRecord> records(1000);
    CHECK(harness::audit_ros(records, 1e-5).pass);
    records[17].ros_violation = true;  // a single injected violation breaks the band
    CHECK_FALSE(harness::audit_ros(records, 1e-5).pass);
    CHECK(harness::audit_ros(records, 1.0).pass);
}

TEST_CASE("uniform dominance audit") {
    Xoshiro256ss rng(2025);
    std::vector<double> uniform(20000);
    for (auto& x : uniform) x = rng.uniform01();
    CHECK(harness::audit_uniform_dominance(uniform).pass);

    std::vector<double> zeros(100, 0.0);
    CHECK_FALSE(harness::audit_uniform_dominance(zeros).pass);

    // the biased estimator dominates uniform under p* ~ U(0,1) at any m
    for (std::uint64_t m : {3ULL, 40ULL}) {
        std::vector<double> estimates;
        estimates.reserve(10000);
        Xoshiro256ss sim(m);
        for (int r = 0; r < 10000; ++r) {
            const double p = sim.uniform01();
            std::uint64_t s = 0;
            for (std::uint64_t i = 0; i < m; ++i) s += sim.uniform01() < p ? 1 : 0;
            estimates.push_back(estimators::p_biased(s, m));
        }
        CHECK(harness::audit_uniform_dominance(std::move(estimates)).pass);
    }
}

TEST_CASE("records csv round trip") {
    std::vector<RunRecord> records;
    RunRecord r;
    r.replication_index = 3;
    r.rule = "reject_or_cap";
    r.p_true = 0.123456789012345;
    r.p_estimate = 0.05;
    r.n_used = 777;
    r.stop_reason = "significant";
    r.ros_violation = true;
    records.push_back(r);
    const std::string path = "records_roundtrip.csv";
    harness::write_records_csv(path, records);
    const auto back = harness::read_records_csv(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].replication_index == 3);
    CHECK(back[0].rule == "reject_or_cap");
    CHECK(back[0].p_true == r.p_true);
    CHECK(back[0].n_used == 777);
    CHECK(back[0].ros_violation);
    std::remove(path.c_str());
}

TEST_CASE("config json round trip") {
    ExperimentConfig c;
    c.experiment = "plant_growth";
    c.replications = 123;
    c.epsilon = 1e-4;
    c.master_seed = 99;
    c.data_path = kPlantCsv;
    c.p_override = 0.02417;
    const auto text = harness::config_to_json(c);
    const auto back = harness::config_from_json(text);
    CHECK(back.experiment == "plant_growth");
    CHECK(back.replications == 123);
    CHECK(back.p_override == 0.02417);
    CHECK(back.digest_hex() == c.digest_hex());
    CHECK_THROWS_AS(harness::config_from_json(R"({"experiment":"nope"})"), std::domain_error);
}

TEST_CASE("null study is reproducible and worker-count independent") {
    ExperimentConfig c;
    c.experiment = "null_study";
    c.replications = 40;
    c.epsilon = 1e-5;
    c.alpha = 0.05;
    c.n_max = 1500;
    c.master_seed = 31415;

    c.threads = 1;
    const auto a = harness::simulate_null_study(c);
    c.threads = 2;
    const auto b = harness::simulate_null_study(c);
    REQUIRE(a.records.size() == 160);
    REQUIRE(b.records.size() == 160);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].rule == b.records[i].rule);
        CHECK(a.records[i].p_true == b.records[i].p_true);
        CHECK(a.records[i].p_estimate == b.records[i].p_estimate);
        CHECK(a.records[i].n_used == b.records[i].n_used);
        CHECK(a.records[i].ros_violation == b.records[i].ros_violation);
    }

    // fixed-n rules stop where they must
    for (std::size_t i = 0; i < a.records.size(); i += 4) {
        CHECK(a.records[i].n_used == 1000);
        CHECK(a.records[i + 1].n_used == 1500);
        CHECK(a.records[i + 2].n_used <= 1500);
    }
    CHECK(harness::audit_ros(a.records, c.epsilon).pass);
}

TEST_CASE("null study reject-branch estimates live in (eps, alpha]") {
    ExperimentConfig c;
    c.experiment = "null_study";
    c.replications = 60;
    c.epsilon = 1e-5;
    c.alpha = 0.05;
    c.n_max = 4000;
    c.master_seed = 271828;
    c.threads = 2;
    const auto res = harness::simulate_null_study(c);
    int reject_stops = 0;
    for (const auto& r : res.records) {
        if (r.rule != "reject_or_cap") continue;
        if (r.stop_reason == "significant") {
            ++reject_stops;
            CHECK(r.p_estimate <= c.alpha);
            CHECK(r.p_estimate > c.epsilon);
        } else {
            CHECK(r.stop_reason == "cap");
        }
    }
    CHECK(reject_stops > 0);  // about 5% of uniform draws resolve significant
}

TEST_CASE("plant growth study, reduced replication count") {
    ExperimentConfig c;
    c.experiment = "plant_growth";
    c.replications = 60;
    c.epsilon = 1e-5;
    c.alpha = 0.05;
    c.n_max = 100000;
    c.master_seed = 16180;
    c.threads = 2;
    c.data_path = kPlantCsv;
    const auto res = harness::plant_growth_study(c);
    CHECK(res.exact.total_splits == 184756);
    CHECK(res.exact.exceed_count == 4465);
    CHECK(std::fabs(res.exact.p_value - 0.02417) < 1e-5);
    CHECK(res.p_star_used == res.exact.p_value);
    CHECK(res.failures_to_reject == 0);
    CHECK(res.mean_n > 500.0);
    CHECK(res.mean_n < 5000.0);
    CHECK(res.min_n >= 339);  // no stop can beat the all-zero crossing
}

TEST_CASE("study outputs land on disk with a summary") {
    namespace fs = std::filesystem;
    ExperimentConfig c;
    c.experiment = "null_study";
    c.replications = 10;
    c.epsilon = 1e-4;
    c.n_max = 500;
    c.master_seed = 12;
    c.threads = 1;
    c.output_path = "null_study_smoke.csv";
    harness::simulate_null_study(c);
    CHECK(fs::exists("null_study_smoke.csv"));
    CHECK(fs::exists("null_study_smoke.csv.summary.json"));
    const auto records = harness::read_records_csv("null_study_smoke.csv");
    CHECK(records.size() == 40);
    fs::remove("null_study_smoke.csv");
    fs::remove("null_study_smoke.csv.summary.json");
}

TEST_CASE("replication audit at easy operating points") {
    // p* far above alpha: both analysts conclude insignificance fast
    auto audit = harness::audit_replication_disagreement(0.5, 0.05, 1e-3, 300, 1, 100000, 2);
    CHECK(audit.pass);
    CHECK(audit.disagreements == 0);

    // degenerate p* = 0: both reject after the all-zero crossing
    audit = harness::audit_replication_disagreement(0.0, 0.05, 1e-3, 50, 2, 100000, 2);
    CHECK(audit.pass);
    CHECK(audit.rate == 0.0);
}
