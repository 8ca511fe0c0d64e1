#include "seqpv/confidence.hpp"

#include <cmath>
#include <stdexcept>

#include "seqpv/binomial.hpp"

namespace seqpv::confseq {

namespace {

constexpr double kUpperTol = 1e-12;
constexpr double kCpTol = 1e-10;

void check_domain(std::uint64_t n, std::uint64_t s, double epsilon, const char* who) {
    if (n < 1) throw std::domain_error(std::string(who) + ": n must be >= 1");
    if (s > n) throw std::domain_error(std::string(who) + ": s > n");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error(std::string(who) + ": epsilon outside (0,1)");
}

double log_threshold(std::uint64_t n, double epsilon) {
    return std::log(epsilon) - std::log(static_cast<double>(n) + 1.0);
}

// log pmf as a function of p with (n,s) fixed; the log-choose part is hoisted
// out of root-finding loops.
double log_pmf_at(std::uint64_t n, std::uint64_t s, double log_c, double p) {
    if (p <= 0.0) return s == 0 ? 0.0 : -INFINITY;
    if (p >= 1.0) return s == n ? 0.0 : -INFINITY;
    double lp = log_c;
    if (s > 0) lp += static_cast<double>(s) * std::log(p);
    if (s < n) lp += static_cast<double>(n - s) * std::log1p(-p);
    return lp;
}

}  // namespace

double robbins_upper(std::uint64_t n, std::uint64_t s, double epsilon) {
    check_domain(n, s, epsilon, "robbins_upper");
    if (s == n) return 1.0;  // pmf at p=1 equals 1 >= eps/(n+1)
    return detail::upper_in_bracket(n, s, epsilon, 1.0);
}

double robbins_lower(std::uint64_t n, std::uint64_t s, double epsilon) {
    check_domain(n, s, epsilon, "robbins_lower");
    if (s == 0) return 0.0;  // pmf at p=0 equals 1
    // pmf(p) is increasing on [0, s/n]; the lower limit is the root there.
    const double log_c = binom::log_choose(n, s);
    const double thr = log_threshold(n, epsilon);
    const double mode = static_cast<double>(s) / static_cast<double>(n);
    auto g = [&](double p) { return log_pmf_at(n, s, log_c, p) - thr; };
    return binom::bisect_root(g, 0.0, mode, kUpperTol);
}

ConfidenceBounds robbins_bounds(std::uint64_t n, std::uint64_t s, double epsilon) {
    return ConfidenceBounds{robbins_lower(n, s, epsilon), robbins_upper(n, s, epsilon), epsilon, n,
                            s};
}

double clopper_pearson_upper(std::uint64_t m, std::uint64_t s, double epsilon) {
    check_domain(m, s, epsilon, "clopper_pearson_upper");
    if (s == m) return 1.0;  // cdf(m,m,p) = 1 for every p: no upper exclusion
    // binomial_cdf(m,s,p) decreases from 1 at p=0 to 0 at p=1.
    auto g = [&](double p) { return binom::binomial_cdf(m, s, p) - epsilon; };
    return binom::bisect_root(g, 0.0, 1.0, kCpTol);
}

namespace detail {

bool upper_below(std::uint64_t n, std::uint64_t s, double epsilon, double q) {
    if (q > 1.0) return true;  // upper limit is at most 1
    if (s == n) return false;
    if (q >= 1.0) return true;  // pmf at 1 is 0 for s < n
    const double mode = static_cast<double>(s) / static_cast<double>(n);
    if (q <= mode) return false;
    return log_pmf_at(n, s, binom::log_choose(n, s), q) < log_threshold(n, epsilon);
}

bool upper_at_most(std::uint64_t n, std::uint64_t s, double epsilon, double q) {
    if (q >= 1.0) return true;
    if (s == n) return false;
    const double mode = static_cast<double>(s) / static_cast<double>(n);
    if (q < mode) return false;
    return log_pmf_at(n, s, binom::log_choose(n, s), q) <= log_threshold(n, epsilon);
}

bool lower_above(std::uint64_t n, std::uint64_t s, double epsilon, double q) {
    if (q < 0.0) return true;
    if (s == 0) return false;  // lower limit is 0
    const double mode = static_cast<double>(s) / static_cast<double>(n);
    if (q >= mode) return false;
    return log_pmf_at(n, s, binom::log_choose(n, s), q) < log_threshold(n, epsilon);
}

double upper_in_bracket(std::uint64_t n, std::uint64_t s, double epsilon, double hi) {
    const double log_c = binom::log_choose(n, s);
    const double thr = log_threshold(n, epsilon);
    const double mode = static_cast<double>(s) / static_cast<double>(n);
    // pmf is strictly decreasing on [mode, 1] and pmf(mode) > eps/(n+1).
    auto g = [&](double p) { return log_pmf_at(n, s, log_c, p) - thr; };
    return binom::bisect_root(g, mode, hi, kUpperTol);
}

}  // namespace detail

}  // namespace seqpv::confseq
