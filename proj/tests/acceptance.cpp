// Acceptance suite: every release-gating criterion, one pass/fail line each.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coverage_check.hpp"
#include "seqpv/harness.hpp"

using namespace seqpv;

namespace {

const std::string kPlantCsv = std::string(SEQPV_SOURCE_DIR) + "/data/plant_growth.csv";

int failures = 0;

class Criterion {
  public:
    Criterion(int number, std::string label)
        : number_(number), label_(std::move(label)), start_(std::chrono::steady_clock::now()) {}

    void expect(bool ok, const std::string& detail) {
        if (!ok) {
            all_ok_ = false;
            details_ += (details_.empty() ? "" : "; ") + detail;
        } else if (details_.empty()) {
            details_ = detail;
        } else {
            details_ += "; " + detail;
        }
    }

    ~Criterion() {
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start_)
                                 .count();
        std::printf("[%s] criterion %d: %s (%s) [%lld ms]\n", all_ok_ ? "PASS" : "FAIL", number_,
                    label_.c_str(), details_.c_str(), static_cast<long long>(elapsed));
        std::fflush(stdout);
        if (!all_ok_) ++failures;
    }

  private:
    int number_;
    std::string label_;
    std::string details_;
    bool all_ok_ = true;
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_1_fixed_sample_risk() {
    Criterion c(1, "fixed-sample risk of mistaken rejection at p*=0.06, m=1000");
    const double risk = harness::fixed_sample_risk(0.06, 1000, 0.05);
    c.expect(risk >= 0.077 && risk <= 0.079, fmt("risk=%.6f in [0.077,0.079]", risk));
}

void criterion_2_all_zero_thresholds() {
    Criterion c(2, "all-zero thresholds at eps=1e-5, alpha=0.05");
    const auto t = harness::all_zero_thresholds(1e-5, 0.05);
    c.expect(t.cp_min_m == 225, fmt("clopper-pearson min m=%llu (want 225)",
                                    static_cast<unsigned long long>(t.cp_min_m)));
    c.expect(t.anytime_first_n == 339, fmt("anytime first crossing n=%llu (want 339)",
                                           static_cast<unsigned long long>(t.anytime_first_n)));
    c.expect(std::fabs(t.cp_epsilon_at_30 - 0.215) <= 0.001,
             fmt("eps threshold at m=30 is %.4f (want 0.215 +- 0.001)", t.cp_epsilon_at_30));
}

void criterion_3_exact_enumeration() {
    Criterion c(3, "plant-growth exact p-value over 184756 splits");
    const auto data = perm::load_two_group_csv(kPlantCsv, "ctrl", "trt2");
    const auto res = perm::exact_permutation_detail(data);
    c.expect(res.total_splits == 184756, fmt("splits=%llu", static_cast<unsigned long long>(
                                                                res.total_splits)));
    c.expect(std::fabs(res.p_value - 0.02417) <= 1e-5,
             fmt("p=%.7f (count %llu)", res.p_value,
                 static_cast<unsigned long long>(res.exceed_count)));
}

void criterion_4_plant_growth_sequential() {
    Criterion c(4, "plant-growth sequential study, 1e4 replications at p*=0.02417");
    harness::ExperimentConfig cfg;
    cfg.experiment = "plant_growth";
    cfg.replications = 10000;
    cfg.epsilon = 1e-5;
    cfg.alpha = 0.05;
    cfg.n_max = 100000;
    cfg.master_seed = 20250810;
    cfg.threads = 0;
    cfg.data_path = kPlantCsv;
    cfg.p_override = 0.02417;
    const auto res = harness::plant_growth_study(cfg);
    c.expect(res.mean_n >= 1639.0 && res.mean_n <= 2003.0,
             fmt("mean samples=%.1f in [1639,2003]", res.mean_n));
    c.expect(res.failures_to_reject == 0,
             fmt("failures to reject=%llu",
                 static_cast<unsigned long long>(res.failures_to_reject)));
}

void criterion_5_null_study() {
    Criterion c(5, "null simulation, 1e3 replications, four stopping rules");
    harness::ExperimentConfig cfg;
    cfg.experiment = "null_study";
    cfg.replications = 1000;
    cfg.epsilon = 1e-5;
    cfg.alpha = 0.05;
    cfg.n_max = 100000;
    cfg.master_seed = 73;
    cfg.threads = 0;
    const auto res = harness::simulate_null_study(cfg);

    const auto ros = harness::audit_ros(res.records, cfg.epsilon);
    c.expect(ros.violations == 0, fmt("ros violations=%llu (expected count 0.01)",
                                      static_cast<unsigned long long>(ros.violations)));

    std::map<std::string, std::vector<double>> by_rule;
    for (const auto& r : res.records) by_rule[r.rule].push_back(r.p_estimate);
    for (auto& [rule, estimates] : by_rule) {
        const auto dom = harness::audit_uniform_dominance(std::move(estimates), 1e-3);
        c.expect(dom.sup_excess <= 0.0617,
                 fmt("%s ecdf excess=%.4f <= 0.0617", rule.c_str(), dom.sup_excess));
    }
}

void criterion_6_exact_coverage() {
    Criterion c(6, "exact finite-horizon coverage of the confidence sequence, n <= 12");
    std::vector<double> p_grid;
    for (int k = 1; k <= 19; ++k) p_grid.push_back(0.05 * k);
    const auto res = coverage_check::certify(12, {0.05, 0.2}, p_grid);
    c.expect(res.ok, fmt("worst margin eps - P(violate) = %.3e at p=%.2f, n=%d",
                         res.worst_margin, res.worst_p, res.worst_n));
}

void criterion_7_monotonicity() {
    Criterion c(7, "anytime estimate never increases and never dips below eps, 1e5 trajectories");
    const std::uint64_t trajectories = 100000;
    std::vector<std::uint8_t> bad(trajectories, 0);
    harness::parallel_for(trajectories, 0, [&](std::uint64_t t) {
        Xoshiro256ss rng(derive_seed(424243, t));
        const double eps = std::exp(std::log(1e-6) + rng.uniform01() * std::log(3e5));
        const double p = rng.uniform01();
        const int steps = 20 + static_cast<int>(rng.uniform_below(180));
        auto est = estimators::make_anytime(eps);
        double prev = est.p_tilde;
        for (int i = 0; i < steps; ++i) {
            est = estimators::anytime_update(est, rng.uniform01() < p);
            if (est.p_tilde > prev || est.p_tilde < eps) {
                bad[t] = 1;
                return;
            }
            prev = est.p_tilde;
        }
    });
    std::uint64_t total_bad = 0;
    for (auto b : bad) total_bad += b;
    c.expect(total_bad == 0,
             fmt("increasing or sub-eps steps in %llu of %llu trajectories",
                 static_cast<unsigned long long>(total_bad),
                 static_cast<unsigned long long>(trajectories)));
}

void criterion_8_replication_disagreement() {
    Criterion c(8, "analyst-replication disagreement at p*=0.04, eps=1e-3, 1e4 pairs");
    const auto audit =
        harness::audit_replication_disagreement(0.04, 0.05, 1e-3, 10000, 515253, 100000, 0);
    c.expect(audit.pass, fmt("rate=%.5f <= %.5f (%llu disagreements)", audit.rate,
                             audit.threshold,
                             static_cast<unsigned long long>(audit.disagreements)));
}

void criterion_9_resume_determinism() {
    Criterion c(9, "run split at an arbitrary save point equals the uninterrupted run");
    const double eps = 1e-4;
    stopping::RunOptions opts;
    opts.record_rows = true;
    const stopping::StoppingRule full_rule{stopping::Cap{1500}};

    streams::SyntheticStream whole_stream(0.27, 8675309);
    const auto whole = stopping::run_until(whole_stream, eps, full_rule, opts);
    stopping::write_trajectory_csv("acc9_whole.csv", whole.trajectory, false);

    streams::SyntheticStream part_stream(0.27, 8675309);
    const auto part =
        stopping::run_until(part_stream, eps, stopping::StoppingRule{stopping::Cap{617}}, opts);
    stopping::write_trajectory_csv("acc9_split.csv", part.trajectory, false);
    stopping::write_checkpoint_file(
        "acc9_state.json",
        stopping::make_checkpoint(part_stream, part.final_state, part.trajectory, full_rule));

    const auto cp = stopping::read_checkpoint_file("acc9_state.json");
    streams::SyntheticStream resumed_stream(cp.stream_state, 0.27);
    const auto rest = stopping::resume_until(resumed_stream, cp, full_rule, opts);
    stopping::write_trajectory_csv("acc9_split.csv", rest.trajectory, true);

    const auto a = slurp("acc9_whole.csv");
    const auto b = slurp("acc9_split.csv");
    c.expect(!a.empty() && a == b, fmt("csv diff %s (%zu bytes)",
                                       a == b ? "empty" : "NON-EMPTY", a.size()));
    c.expect(rest.report.n_used == whole.report.n_used &&
                 rest.report.estimate == whole.report.estimate,
             "final reports identical");
    std::remove("acc9_whole.csv");
    std::remove("acc9_split.csv");
    std::remove("acc9_state.json");
}

}  // namespace

int main() {
    std::printf("seqpv acceptance suite\n");
    criterion_1_fixed_sample_risk();
    criterion_2_all_zero_thresholds();
    criterion_3_exact_enumeration();
    criterion_4_plant_growth_sequential();
    criterion_5_null_study();
    criterion_6_exact_coverage();
    criterion_7_monotonicity();
    criterion_8_replication_disagreement();
    criterion_9_resume_determinism();
    if (failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", failures);
    return 1;
}
