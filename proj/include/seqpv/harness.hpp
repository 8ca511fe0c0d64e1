#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seqpv/permutation.hpp"
#include "seqpv/stopping.hpp"

namespace seqpv::harness {

struct ExperimentConfig {
    std::string experiment = "null_study";  // null_study | plant_growth
    std::uint64_t replications = 1000;
    double epsilon = 1e-5;
    double alpha = 0.05;
    std::uint64_t n_max = 100000;
    std::uint64_t master_seed = 1;
    std::optional<stopping::StoppingRule> rule;  // plant_growth only; default reject-or-cap
    std::string output_path;                     // CSV; empty = no files written
    int threads = 0;                             // 0 = hardware concurrency

    // plant_growth inputs
    std::string data_path = "data/plant_growth.csv";
    std::string group_a = "ctrl";
    std::string group_b = "trt2";
    std::optional<double> p_override;  // run the streams at this p* instead of the enumerated one

    void validate() const;
    std::string digest_hex() const;  // provenance tag written into summaries
};

std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);

/// One (replication, rule) outcome of a study.
struct RunRecord {
    std::uint64_t replication_index = 0;
    std::string rule;
    double p_true = 0.0;
    double p_estimate = 1.0;
    std::uint64_t n_used = 0;
    std::string stop_reason;
    bool ros_violation = false;  // existed n <= stop with p_tilde_n < p_true
};

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(const std::string& path);

/// Exact P((1+S)/(m+1) <= alpha) for S ~ Bin(m, p_true): the chance a biased
/// fixed-sample estimate implies rejection at alpha. Analytic, no sampling.
double fixed_sample_risk(double p_true, std::uint64_t m, double alpha);

struct AllZeroThresholds {
    std::uint64_t cp_min_m = 0;        // min m with CP upper limit <= alpha on all zeros
    std::uint64_t anytime_first_n = 0; // first n with p_tilde <= alpha on all zeros
    double cp_epsilon_at_30 = 1.0;     // min epsilon with CP(30, 0) upper limit <= alpha
};

AllZeroThresholds all_zero_thresholds(double epsilon, double alpha);

struct NullStudyResult {
    std::vector<RunRecord> records;
    std::vector<std::string> rule_names;
};

/// The null simulation: p* ~ U(0,1) per replication, one bit trajectory to
/// n_max, read off at four stopping times (fixed small n, fixed n_max,
/// reject-or-cap, plateau-or-cap). Bit-reproducible from master_seed and
/// independent of the worker count.
NullStudyResult simulate_null_study(const ExperimentConfig& config);

struct PlantGrowthResult {
    perm::ExactPermutationResult exact;
    double p_star_used = 0.0;
    std::uint64_t replications = 0;
    double mean_n = 0.0;
    std::uint64_t min_n = 0;
    std::uint64_t max_n = 0;
    std::uint64_t failures_to_reject = 0;
    std::vector<RunRecord> records;
};

/// Exact enumeration p-value for the bundled two-group yield data, then
/// repeated sequential estimation at that p* with the reject-or-cap rule.
PlantGrowthResult plant_growth_study(const ExperimentConfig& config);

struct RosAudit {
    std::uint64_t records = 0;
    std::uint64_t violations = 0;
    double threshold = 0.0;  // N*eps + 3 sd of Bin(N, eps)
    bool pass = false;
};

RosAudit audit_ros(const std::vector<RunRecord>& records, double epsilon);

struct DominanceAudit {
    std::size_t n = 0;
    double sup_excess = 0.0;  // sup_t (ECDF(t) - t)
    double band = 0.0;        // two-sided DKW band at confidence 1 - delta
    bool pass = false;
};

DominanceAudit audit_uniform_dominance(std::vector<double> estimates, double delta = 1e-3);

struct ReplicationAudit {
    std::uint64_t pairs = 0;
    std::uint64_t disagreements = 0;
    double rate = 0.0;
    double threshold = 0.0;  // 2 eps + 3 standard errors
    bool pass = false;
};

/// Two analysts, same data (p_true held fixed), independent seeds, both
/// running the anytime decision at significance-resolved-or-cap. Their
/// decisions may disagree with probability at most 2 epsilon.
ReplicationAudit audit_replication_disagreement(double p_true, double alpha, double epsilon,
                                                std::uint64_t pairs, std::uint64_t master_seed,
                                                std::uint64_t cap = 100000, int threads = 0);

/// Runs body(i) for i in [0, count) across a small thread pool. Bodies must
/// be independent; results keyed by i make output order-insensitive.
void parallel_for(std::uint64_t count, int threads,
                  const std::function<void(std::uint64_t)>& body);

}  // namespace seqpv::harness
