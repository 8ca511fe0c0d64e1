#pragma once
#include <cstdint>

namespace seqpv::confseq {

struct ConfidenceBounds {
    double lower = 0.0;
    double upper = 1.0;
    double epsilon = 0.0;
    std::uint64_t n = 0;
    std::uint64_t s = 0;
};

/// Upper limit of the Robbins mixture confidence sequence after n Bernoulli
/// draws with s ones: sup{p in [0,1] : C(n,s) p^s (1-p)^(n-s) >= eps/(n+1)}.
/// The super-level set always contains the mode s/n, so for s = n the limit
/// is 1 (the equation's lone root below the mode is not a confidence limit).
double robbins_upper(std::uint64_t n, std::uint64_t s, double epsilon);

/// Lower limit: inf of the same super-level set. 0 when s = 0.
double robbins_lower(std::uint64_t n, std::uint64_t s, double epsilon);

ConfidenceBounds robbins_bounds(std::uint64_t n, std::uint64_t s, double epsilon);

/// One-sided Clopper-Pearson upper confidence limit: the smallest p with
/// P(Bin(m,p) <= s) <= eps, equivalently the Beta(1-eps; s+1, m-s) quantile.
/// Returns 1 when s = m.
double clopper_pearson_upper(std::uint64_t m, std::uint64_t s, double epsilon);

namespace detail {

/// True iff robbins_upper(n,s,eps) < q, decided by a single log-pmf
/// evaluation (no root-finding). Strict comparison.
bool upper_below(std::uint64_t n, std::uint64_t s, double epsilon, double q);

/// True iff robbins_upper(n,s,eps) <= q.
bool upper_at_most(std::uint64_t n, std::uint64_t s, double epsilon, double q);

/// True iff robbins_lower(n,s,eps) > q.
bool lower_above(std::uint64_t n, std::uint64_t s, double epsilon, double q);

/// robbins_upper refined inside a known bracket [s/n, hi] with
/// log-pmf(hi) already below the threshold. Used by the sequential
/// estimator so each step costs one pmf check unless the bound improves.
double upper_in_bracket(std::uint64_t n, std::uint64_t s, double epsilon, double hi);

}  // namespace detail

}  // namespace seqpv::confseq
