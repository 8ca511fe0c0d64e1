#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "seqpv/estimators.hpp"
#include "seqpv/streams.hpp"

namespace seqpv::stopping {

struct FixedN {
    std::uint64_t n = 1;
};

/// Stop once inference at level alpha is settled either way: the estimate is
/// significant (p_tilde <= alpha) or confidently insignificant (the lower
/// confidence sequence exceeds alpha). With reject_only only the first branch
/// fires; that is the form used by the simulation studies.
struct SignificanceResolved {
    double alpha = 0.05;
    bool reject_only = false;
};

/// Stop once the estimate is no longer decreasing fast enough: at n > n0 when
/// the decrease (p_tilde[n-n0] - p_tilde[n]) / n0 drops to gamma or below.
struct Plateau {
    std::uint64_t n0 = 1;
    double gamma = 0.0;
};

struct Cap {
    std::uint64_t n_max = 1;
};

struct StoppingRule;

struct FirstOf {
    std::vector<StoppingRule> rules;
};

struct StoppingRule {
    std::variant<FixedN, SignificanceResolved, Plateau, Cap, FirstOf> node;
};

void validate_rule(const StoppingRule& rule);  // throws std::domain_error

/// Largest plateau lag appearing anywhere in the rule; a resumed run must
/// carry at least this much p_tilde history.
std::uint64_t rule_memory(const StoppingRule& rule);

StoppingRule rule_from_json(const std::string& text);
std::string rule_to_json(const StoppingRule& rule);

struct StepRow {
    std::uint64_t n = 0;
    std::uint64_t s = 0;
    double upper = 1.0;
    double lower = 0.0;
    double p_tilde = 1.0;
};

/// The p_tilde column is always kept (stopping rules read it); full rows with
/// the confidence limits are recorded only on request. first_step is the
/// global index of p_tilde.front(), > 1 for resumed runs.
struct Trajectory {
    std::vector<double> p_tilde;
    std::uint64_t first_step = 1;
    std::vector<StepRow> rows;
    std::uint64_t stop_index = 0;
    std::string stop_reason;

    std::uint64_t current_step() const { return first_step + p_tilde.size() - 1; }
    double p_tilde_at(std::uint64_t step) const { return p_tilde[step - first_step]; }
    bool covers(std::uint64_t step) const { return step >= first_step && step <= current_step(); }
};

/// Stop decision for the trajectory so far; (s, epsilon) describe the current
/// step, needed for the lower-confidence branch. Returns the reason tag of
/// the first sub-rule that fires, nullopt to keep sampling.
std::optional<std::string> should_stop(const StoppingRule& rule, const Trajectory& trajectory,
                                       std::uint64_t s, double epsilon);

struct RunOptions {
    bool record_rows = false;
    std::uint64_t hard_cap = 10000000ULL;  // absolute stop so every run terminates
};

struct RunResult {
    Trajectory trajectory;
    estimators::EstimateReport report;
    estimators::AnytimeEstimate final_state;
};

/// Drive stream -> anytime estimator -> rule until the rule (or the hard
/// cap) fires. The report carries p_tilde at the stop, epsilon, the stopping
/// reason and the lower confidence limit for context.
RunResult run_until(OracleStream& stream, double epsilon, const StoppingRule& rule,
                    RunOptions options = {});

/// Everything needed to continue a run exactly where it left off.
struct RunCheckpoint {
    streams::SampleState stream_state;
    double epsilon = 0.0;
    double running_min_upper = 1.0;
    std::vector<double> p_tilde_tail;      // most recent values, oldest first
    std::uint64_t tail_first_step = 1;     // global index of p_tilde_tail.front()
};

RunCheckpoint make_checkpoint(const OracleStream& stream, const estimators::AnytimeEstimate& est,
                              const Trajectory& trajectory, const StoppingRule& rule);

std::string checkpoint_to_json(const RunCheckpoint& cp);
RunCheckpoint checkpoint_from_json(const std::string& text);
void write_checkpoint_file(const std::string& path, const RunCheckpoint& cp);
RunCheckpoint read_checkpoint_file(const std::string& path);

/// Continue from a checkpoint; the stream must already be positioned (i.e.
/// resumed from cp.stream_state). Throws if the rule needs more p_tilde
/// history than the checkpoint kept.
RunResult resume_until(OracleStream& stream, const RunCheckpoint& cp, const StoppingRule& rule,
                       RunOptions options = {});

/// Streams recorded rows as "n,s,upper,lower,p_tilde" CSV. With append the
/// header is omitted, so a resumed run continues the original file exactly.
void write_trajectory_csv(const std::string& path, const Trajectory& trajectory,
                          bool append = false);

}  // namespace seqpv::stopping
