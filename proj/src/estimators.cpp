#include "seqpv/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "seqpv/binomial.hpp"
#include "seqpv/confidence.hpp"

namespace seqpv::estimators {

std::string to_json_string(const EstimateReport& report) {
    nlohmann::json j{{"method", report.method},
                     {"estimate", report.estimate},
                     {"n_used", report.n_used},
                     {"epsilon", report.epsilon},
                     {"stopping_reason", report.stopping_reason}};
    if (report.lower_context) j["lower_context"] = *report.lower_context;
    if (!report.tuning.empty()) j["tuning"] = report.tuning;
    return j.dump(2);
}

namespace {

void check_counts(std::uint64_t s, std::uint64_t m, const char* who) {
    if (m == 0) throw std::domain_error(std::string(who) + ": m must be >= 1");
    if (s > m) throw std::domain_error(std::string(who) + ": s > m");
}

}  // namespace

double p_naive(std::uint64_t s, std::uint64_t m) {
    check_counts(s, m, "p_naive");
    return static_cast<double>(s) / static_cast<double>(m);
}

double p_biased(std::uint64_t s, std::uint64_t m) {
    check_counts(s, m, "p_biased");
    return static_cast<double>(1 + s) / static_cast<double>(m + 1);
}

double p_randomized(std::uint64_t s, std::uint64_t m, double u) {
    check_counts(s, m, "p_randomized");
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("p_randomized: u outside [0,1]");
    return (u + static_cast<double>(s)) / static_cast<double>(m + 1);
}

AnytimeEstimate make_anytime(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("anytime estimator: epsilon outside (0,1)");
    AnytimeEstimate st;
    st.epsilon = epsilon;
    return st;
}

AnytimeEstimate anytime_update(AnytimeEstimate state, bool bit) {
    state.n += 1;
    state.s += bit ? 1 : 0;
    if (confseq::detail::upper_below(state.n, state.s, state.epsilon, state.running_min_upper))
        state.running_min_upper = confseq::detail::upper_in_bracket(state.n, state.s,
                                                                    state.epsilon,
                                                                    state.running_min_upper);
    state.p_tilde = std::min(1.0, state.running_min_upper + state.epsilon);
    return state;
}

EstimateReport besag_clifford(OracleStream& stream, std::uint64_t h, std::uint64_t M) {
    if (h < 1 || M < 1) throw std::domain_error("besag_clifford: h and M must be >= 1");
    if (h > M) throw std::domain_error("besag_clifford: need h <= M");
    std::uint64_t ones = 0;
    EstimateReport rep;
    rep.method = "besag_clifford";
    rep.tuning = {{"h", static_cast<double>(h)}, {"M", static_cast<double>(M)}};
    for (std::uint64_t l = 1; l <= M; ++l) {
        ones += stream.next() ? 1 : 0;
        if (ones == h && l < M) {
            rep.estimate = static_cast<double>(h) / static_cast<double>(l);
            rep.n_used = l;
            rep.stopping_reason = "h_ones_reached";
            return rep;
        }
    }
    rep.estimate = p_biased(ones, M);
    rep.n_used = M;
    rep.stopping_reason = "max_samples";
    return rep;
}

EstimateReport silva_assuncao(OracleStream& stream, std::uint64_t h, std::uint64_t t1,
                              std::uint64_t Ce, std::uint64_t M) {
    if (h < 1) throw std::domain_error("silva_assuncao: h must be >= 1");
    if (t1 > M) throw std::domain_error("silva_assuncao: need t1 <= M");
    EstimateReport rep;
    rep.method = "silva_assuncao";
    rep.epsilon = 0.0;
    rep.tuning = {{"h", static_cast<double>(h)},
                  {"t1", static_cast<double>(t1)},
                  {"Ce", static_cast<double>(Ce)},
                  {"M", static_cast<double>(M)}};
    std::uint64_t ones = 0;
    for (std::uint64_t t = 1; t <= t1; ++t) {
        ones += stream.next() ? 1 : 0;
        if (ones >= h) {
            rep.estimate = 0.0;  // accept
            rep.n_used = t;
            rep.stopping_reason = "early_accept";
            return rep;
        }
    }
    for (std::uint64_t t = t1 + 1; t <= M; ++t) ones += stream.next() ? 1 : 0;
    // reject exactly when the final count falls short of Ce
    rep.estimate = ones < Ce ? 1.0 : 0.0;
    rep.n_used = M;
    rep.stopping_reason = "max_samples";
    return rep;
}

EstimateReport andrews_three_step(OracleStream& stream, double d, double tau,
                                  std::optional<double> f_inf_at_T) {
    if (!(d > 0.0)) throw std::domain_error("andrews_three_step: d must be positive");
    if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("andrews_three_step: tau outside (0,1)");
    double omega0 = 0.25;  // pessimistic maximum when the asymptotic cdf is unavailable
    if (f_inf_at_T) {
        if (!(*f_inf_at_T >= 0.0 && *f_inf_at_T < 1.0))
            throw std::domain_error("andrews_three_step: f_inf_at_T outside [0,1)");
        omega0 = *f_inf_at_T / (1.0 - *f_inf_at_T);
    }
    const double z = binom::normal_quantile(1.0 - tau / 2.0);
    const double z2 = z * z;
    const auto m1 =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(z2 * omega0 / (d * d))));
    std::uint64_t ones = 0;
    for (std::uint64_t i = 0; i < m1; ++i) ones += stream.next() ? 1 : 0;
    const double p_hat = p_naive(ones, m1);
    const double omega_hat = p_hat * (1.0 - p_hat);
    const auto m2 = static_cast<std::uint64_t>(std::ceil(z2 * omega_hat / (d * d)));
    const std::uint64_t m = std::max(m1, m2);
    for (std::uint64_t i = m1; i < m; ++i) ones += stream.next() ? 1 : 0;
    EstimateReport rep;
    rep.method = "andrews";
    rep.estimate = p_naive(ones, m);
    rep.n_used = m;
    rep.stopping_reason = "three_step_complete";
    rep.tuning = {{"d", d},
                  {"tau", tau},
                  {"omega0", omega0},
                  {"m1", static_cast<double>(m1)},
                  {"m2", static_cast<double>(m2)}};
    return rep;
}

EstimateReport wald_sprt(OracleStream& stream, double alpha, double delta, double eps0,
                         double eps1, std::uint64_t M) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("wald_sprt: alpha outside (0,1)");
    if (!(delta > 0.0 && delta < alpha && delta < 1.0 - alpha))
        throw std::domain_error("wald_sprt: need 0 < delta < min(alpha, 1-alpha)");
    if (!(eps0 > 0.0 && eps0 < 1.0 && eps1 > 0.0 && eps1 < 1.0))
        throw std::domain_error("wald_sprt: error rates outside (0,1)");
    if (M < 1) throw std::domain_error("wald_sprt: M must be >= 1");

    // Log-likelihood ratio of Bernoulli(alpha+delta) against Bernoulli(alpha-delta).
    const double step_one = std::log((alpha + delta) / (alpha - delta));
    const double step_zero = std::log((1.0 - alpha - delta) / (1.0 - alpha + delta));
    const double upper = std::log((1.0 - eps1) / eps0);
    const double lower = std::log(eps1 / (1.0 - eps0));

    EstimateReport rep;
    rep.method = "sprt";
    rep.tuning = {{"alpha", alpha}, {"delta", delta}, {"eps0", eps0},
                  {"eps1", eps1},   {"M", static_cast<double>(M)}};
    double llr = 0.0;
    for (std::uint64_t n = 1; n <= M; ++n) {
        llr += stream.next() ? step_one : step_zero;
        if (llr >= upper) {
            // p* >= alpha+delta: the underlying test is not rejected
            rep.estimate = 0.0;
            rep.n_used = n;
            rep.stopping_reason = "accept_boundary";
            rep.tuning["llr"] = llr;
            return rep;
        }
        if (llr <= lower) {
            // p* <= alpha-delta: reject
            rep.estimate = 1.0;
            rep.n_used = n;
            rep.stopping_reason = "reject_boundary";
            rep.tuning["llr"] = llr;
            return rep;
        }
    }
    rep.estimate = 0.0;
    rep.n_used = M;
    rep.stopping_reason = "inconclusive_cap";
    rep.tuning["llr"] = llr;
    return rep;
}

double shift_alpha(double alpha, double epsilon) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("shift_alpha: alpha outside (0,1)");
    if (!(epsilon > 0.0 && epsilon < alpha))
        throw std::domain_error("shift_alpha: need 0 < epsilon < alpha");
    return alpha - epsilon;
}

double inflate_p(double p_hat, double epsilon) {
    if (!(epsilon >= 0.0)) throw std::domain_error("inflate_p: epsilon must be >= 0");
    if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw std::domain_error("inflate_p: p_hat outside [0,1]");
    return std::min(p_hat + epsilon, 1.0);
}

}  // namespace seqpv::estimators
