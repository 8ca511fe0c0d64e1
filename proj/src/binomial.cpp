#include "seqpv/binomial.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqpv::binom {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

long double log_choose_l(std::uint64_t n, std::uint64_t k) {
    return lgammal(static_cast<long double>(n) + 1.0L) -
           lgammal(static_cast<long double>(k) + 1.0L) -
           lgammal(static_cast<long double>(n - k) + 1.0L);
}

long double pmf_log_l(std::uint64_t n, std::uint64_t k, long double p) {
    if (p <= 0.0L) return k == 0 ? 0.0L : -std::numeric_limits<long double>::infinity();
    if (p >= 1.0L) return k == n ? 0.0L : -std::numeric_limits<long double>::infinity();
    long double lp = log_choose_l(n, k);
    if (k > 0) lp += static_cast<long double>(k) * logl(p);
    if (k < n) lp += static_cast<long double>(n - k) * log1pl(-p);
    return lp;
}

}  // namespace

double log_choose(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw std::domain_error("log_choose: k > n");
    if (n > 1000000000ULL) throw std::domain_error("log_choose: n > 1e9");
    if (k == 0 || k == n) return 0.0;
    return static_cast<double>(log_choose_l(n, k));
}

double binomial_pmf_log(std::uint64_t n, std::uint64_t k, double p) {
    if (k > n) throw std::domain_error("binomial_pmf_log: k > n");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binomial_pmf_log: p outside [0,1]");
    return static_cast<double>(pmf_log_l(n, k, static_cast<long double>(p)));
}

double binomial_cdf(std::uint64_t n, std::uint64_t k, double p) {
    if (k > n) throw std::domain_error("binomial_cdf: k > n");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binomial_cdf: p outside [0,1]");
    if (k == n) return 1.0;
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return 0.0;

    const long double pl = static_cast<long double>(p);
    const long double odds = pl / (1.0L - pl);
    // Mode of the pmf; terms decrease monotonically moving away from it.
    const long double mode_l = floorl(static_cast<long double>(n + 1) * pl);
    const std::uint64_t mode =
        mode_l < 0.0L ? 0 : (mode_l > static_cast<long double>(n) ? n : static_cast<std::uint64_t>(mode_l));

    if (k < mode) {
        // Lower tail is the smaller mass: sum pmf(k), pmf(k-1), ... downward.
        long double term = expl(pmf_log_l(n, k, pl));
        long double sum = 0.0L;
        for (std::uint64_t j = k;; --j) {
            sum += term;
            if (j == 0 || term <= 1e-30L * (1.0L + sum)) break;
            // pmf(j-1)/pmf(j) = j (1-p) / ((n-j+1) p)
            term *= static_cast<long double>(j) / (static_cast<long double>(n - j + 1) * odds);
        }
        return static_cast<double>(sum);
    }
    // Upper tail is the smaller mass: sum pmf(k+1), pmf(k+2), ... upward.
    long double term = expl(pmf_log_l(n, k + 1, pl));
    long double sum = 0.0L;
    for (std::uint64_t j = k + 1;; ++j) {
        sum += term;
        if (j == n || term <= 1e-30L * (1.0L + sum)) break;
        // pmf(j+1)/pmf(j) = (n-j) p / ((j+1)(1-p))
        term *= static_cast<long double>(n - j) * odds / static_cast<long double>(j + 1);
    }
    const long double cdf = 1.0L - sum;
    return static_cast<double>(cdf < 0.0L ? 0.0L : cdf);
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw std::domain_error("bisect_root: tol must be positive");
    if (!(lo < hi)) throw std::domain_error("bisect_root: need lo < hi");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::domain_error("bisect_root: f(lo) and f(hi) have the same sign");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("normal_quantile: q outside (0,1)");

    // Acklam's rational approximation, |rel err| < 1.15e-9 before polishing.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

    double x;
    if (q < p_low) {
        const double u = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    } else if (q <= 1.0 - p_low) {
        const double u = q - 0.5;
        const double r = u * u;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double u = std::sqrt(-2.0 * std::log1p(-q));
        x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }

    // One Halley step against the erfc-based cdf. Skipped in the extreme
    // tails where exp(x^2/2) overflows; the rational start is already well
    // below any attainable cdf resolution there.
    if (std::abs(x) < 37.0) {
        const double e = normal_cdf(x) - q;
        const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

}  // namespace seqpv::binom
