#pragma once
#include <cstdint>
#include <functional>

namespace seqpv::binom {

/// ln C(n,k) via log-gamma. Requires 0 <= k <= n <= 1e9.
double log_choose(std::uint64_t n, std::uint64_t k);

/// Natural-log binomial pmf ln P(X=k), X ~ Bin(n,p). Degenerate p handled
/// exactly: returns 0.0 for the sure outcome and -inf otherwise.
double binomial_pmf_log(std::uint64_t n, std::uint64_t k, double p);

/// P(X <= k) for X ~ Bin(n,p). Accumulated from the smaller-mass tail with a
/// mode-anchored term recurrence in extended precision, so the result is
/// accurate in absolute terms even when individual terms underflow.
double binomial_cdf(std::uint64_t n, std::uint64_t k, double p);

/// Bisection for a sign change of f on [lo,hi]. f(lo) and f(hi) must have
/// opposite signs (or one of them be exactly zero). Returns the bracket
/// midpoint once the bracket width is <= tol.
double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Standard normal quantile, |error| <= 1e-8. Rational approximation
/// (Acklam) polished with one Halley step against erfc.
double normal_quantile(double q);

/// Phi(x), standard normal cdf.
double normal_cdf(double x);

}  // namespace seqpv::binom
