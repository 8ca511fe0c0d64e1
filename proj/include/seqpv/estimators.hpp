#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "seqpv/streams.hpp"

namespace seqpv::estimators {

/// The reporting tuple recommended for any Monte-Carlo-calibrated result:
/// the estimate itself, the conditional risk bound it was computed under,
/// how many samples were spent and why sampling stopped. For pure decision
/// procedures `estimate` holds the accept/reject value with 1 = reject.
struct EstimateReport {
    std::string method;
    double estimate = 1.0;
    std::uint64_t n_used = 0;
    double epsilon = 0.0;
    std::string stopping_reason;
    std::optional<double> lower_context;
    std::map<std::string, double> tuning;
};

std::string to_json_string(const EstimateReport& report);

// Fixed-sample estimators from s ones in m draws.
double p_naive(std::uint64_t s, std::uint64_t m);       // s/m
double p_biased(std::uint64_t s, std::uint64_t m);      // (1+s)/(m+1)
double p_randomized(std::uint64_t s, std::uint64_t m, double u);  // (u+s)/(m+1)

/// Running state of the anytime-valid estimator: the running minimum of the
/// Robbins upper confidence sequence, inflated by epsilon and clamped to 1.
struct AnytimeEstimate {
    std::uint64_t n = 0;
    std::uint64_t s = 0;
    double epsilon = 0.0;
    double running_min_upper = 1.0;
    double p_tilde = 1.0;
};

AnytimeEstimate make_anytime(double epsilon);

/// Folds one calibration bit into the estimate. p_tilde never increases and
/// never drops below epsilon. Cost is one pmf evaluation unless the upper
/// bound actually improves.
AnytimeEstimate anytime_update(AnytimeEstimate state, bool bit);

/// Sample until h ones are seen or M draws are spent; h/l on an early stop
/// at draw l, otherwise the biased fixed-sample estimate.
EstimateReport besag_clifford(OracleStream& stream, std::uint64_t h, std::uint64_t M);

/// Decision procedure: accept early once h ones arrive within the first t1
/// draws, otherwise sample to M and reject exactly when S_M < Ce.
EstimateReport silva_assuncao(OracleStream& stream, std::uint64_t h, std::uint64_t t1,
                              std::uint64_t Ce, std::uint64_t M);

/// Three-step sample-size selection targeting relative error d at confidence
/// 1-tau; f_inf_at_T is the asymptotic null cdf at the observed statistic
/// when available (omega0 falls back to the pessimistic 1/4 without it).
EstimateReport andrews_three_step(OracleStream& stream, double d, double tau,
                                  std::optional<double> f_inf_at_T = std::nullopt);

/// Wald sequential probability ratio test of p* <= alpha-delta against
/// p* >= alpha+delta with error targets eps0/eps1, capped at M draws.
EstimateReport wald_sprt(OracleStream& stream, double alpha, double delta, double eps0,
                         double eps1, std::uint64_t M);

/// Run a decision procedure at alpha - epsilon to convert an epsilon-bounded
/// resampling risk into an unconditional type-I guarantee at alpha.
double shift_alpha(double alpha, double epsilon);

/// min(p_hat + epsilon, 1): turns an epsilon-bounded-ROS estimate into one
/// that is also unconditionally valid.
double inflate_p(double p_hat, double epsilon);

}  // namespace seqpv::estimators
