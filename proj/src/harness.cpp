#include "seqpv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "seqpv/binomial.hpp"
#include "seqpv/confidence.hpp"

namespace seqpv::harness {

void ExperimentConfig::validate() const {
    if (experiment != "null_study" && experiment != "plant_growth")
        throw std::domain_error("config: unknown experiment '" + experiment + "'");
    if (replications < 1) throw std::domain_error("config: replications must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("config: epsilon outside (0,1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("config: alpha outside (0,1)");
    if (n_max < 1) throw std::domain_error("config: n_max must be >= 1");
    if (rule) stopping::validate_rule(*rule);
    if (p_override && !(*p_override >= 0.0 && *p_override <= 1.0))
        throw std::domain_error("config: p_override outside [0,1]");
}

std::string config_to_json(const ExperimentConfig& c) {
    nlohmann::json j{{"experiment", c.experiment}, {"replications", c.replications},
                     {"epsilon", c.epsilon},       {"alpha", c.alpha},
                     {"n_max", c.n_max},           {"master_seed", c.master_seed},
                     {"output_path", c.output_path}, {"threads", c.threads},
                     {"data_path", c.data_path},   {"group_a", c.group_a},
                     {"group_b", c.group_b}};
    if (c.rule) j["rule"] = nlohmann::json::parse(stopping::rule_to_json(*c.rule));
    if (c.p_override) j["p_override"] = *c.p_override;
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::domain_error(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig c;
    auto get = [&](const char* key, auto& into) {
        if (j.contains(key)) into = j[key].get<std::decay_t<decltype(into)>>();
    };
    get("experiment", c.experiment);
    get("replications", c.replications);
    get("epsilon", c.epsilon);
    get("alpha", c.alpha);
    get("n_max", c.n_max);
    get("master_seed", c.master_seed);
    get("output_path", c.output_path);
    get("threads", c.threads);
    get("data_path", c.data_path);
    get("group_a", c.group_a);
    get("group_b", c.group_b);
    if (j.contains("rule")) c.rule = stopping::rule_from_json(j["rule"].dump());
    if (j.contains("p_override")) c.p_override = j["p_override"].get<double>();
    c.validate();
    return c;
}

std::string ExperimentConfig::digest_hex() const {
    return streams::digest_hex(streams::fnv1a(config_to_json(*this)));
}

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output csv: " + path);
    out << "replication,rule,p_true,p_estimate,n_used,stop_reason,ros_violation\n";
    char buf[64];
    for (const auto& r : records) {
        out << r.replication_index << ',' << r.rule << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.p_true);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.p_estimate);
        out << buf << ',' << r.n_used << ',' << r.stop_reason << ','
            << (r.ros_violation ? 1 : 0) << '\n';
    }
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open records csv: " + path);
    std::vector<RunRecord> records;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        RunRecord r;
        auto next_field = [&]() {
            if (!std::getline(ss, field, ','))
                throw std::runtime_error(path + ": short record line: " + line);
            return field;
        };
        r.replication_index = std::stoull(next_field());
        r.rule = next_field();
        r.p_true = std::stod(next_field());
        r.p_estimate = std::stod(next_field());
        r.n_used = std::stoull(next_field());
        r.stop_reason = next_field();
        r.ros_violation = std::stoull(next_field()) != 0;
        records.push_back(std::move(r));
    }
    return records;
}

double fixed_sample_risk(double p_true, std::uint64_t m, double alpha) {
    if (!(p_true >= 0.0 && p_true <= 1.0))
        throw std::domain_error("fixed_sample_risk: p_true outside [0,1]");
    if (m < 1) throw std::domain_error("fixed_sample_risk: m must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("fixed_sample_risk: alpha outside (0,1)");
    // (1+S)/(m+1) <= alpha  iff  S <= alpha(m+1) - 1
    const long double cutoff =
        floorl(static_cast<long double>(alpha) * static_cast<long double>(m + 1)) - 1.0L;
    if (cutoff < 0.0L) return 0.0;
    const auto k = static_cast<std::uint64_t>(cutoff);
    if (k >= m) return 1.0;
    return binom::binomial_cdf(m, k, p_true);
}

AllZeroThresholds all_zero_thresholds(double epsilon, double alpha) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("all_zero_thresholds: epsilon outside (0,1)");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("all_zero_thresholds: alpha outside (0,1]");
    AllZeroThresholds out;

    // (a) smallest fixed sample size whose all-zero CP upper limit is <= alpha
    std::uint64_t m = 1;
    if (alpha < 1.0) {
        const double guess = std::log(epsilon) / std::log1p(-alpha);
        if (std::isfinite(guess) && guess > 4.0) m = static_cast<std::uint64_t>(guess) - 3;
    }
    while (confseq::clopper_pearson_upper(m, 0, epsilon) > alpha) {
        ++m;
        if (m > 100000000ULL)
            throw std::runtime_error("all_zero_thresholds: no CP crossing below 1e8 samples");
    }
    out.cp_min_m = m;

    // (b) smallest epsilon at which 30 all-zero samples put the CP limit <= alpha
    {
        auto f = [&](double e) { return confseq::clopper_pearson_upper(30, 0, e) - alpha; };
        const double lo = 1e-12, hi = 1.0 - 1e-12;
        out.cp_epsilon_at_30 = f(lo) <= 0.0 ? lo : binom::bisect_root(f, lo, hi, 1e-10);
    }

    // (c) first n at which the anytime estimate drops to alpha on all zeros;
    // a threshold needs at least one sample even when alpha = 1
    {
        auto est = estimators::make_anytime(epsilon);
        do {
            est = estimators::anytime_update(est, false);
            if (est.n > 100000000ULL)
                throw std::runtime_error("all_zero_thresholds: no anytime crossing below 1e8");
        } while (est.p_tilde > alpha);
        out.anytime_first_n = est.n;
    }
    return out;
}

void parallel_for(std::uint64_t count, int threads,
                  const std::function<void(std::uint64_t)>& body) {
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, count));
    if (workers <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::uint64_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::uint64_t i = cursor.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct RuleTracker {
    std::string name;
    stopping::StoppingRule rule;
    bool fired = false;
    std::uint64_t stop_n = 0;
    std::string reason;
    double estimate = 1.0;
};

}  // namespace

NullStudyResult simulate_null_study(const ExperimentConfig& config) {
    config.validate();
    const std::uint64_t n_max = config.n_max;
    const std::uint64_t n_small = std::min<std::uint64_t>(1000, n_max);
    const double alpha = config.alpha;
    const double eps = config.epsilon;

    const std::string name_fixed_small = "fixed_n_" + std::to_string(n_small);
    const std::string name_fixed_cap = "fixed_n_" + std::to_string(n_max);
    const std::vector<std::string> rule_names{name_fixed_small, name_fixed_cap, "reject_or_cap",
                                              "plateau_or_cap"};

    auto make_trackers = [&]() {
        std::vector<RuleTracker> ts;
        ts.push_back({name_fixed_small, stopping::StoppingRule{stopping::FixedN{n_small}}});
        ts.push_back({name_fixed_cap, stopping::StoppingRule{stopping::FixedN{n_max}}});
        stopping::FirstOf reject_or_cap;
        reject_or_cap.rules.push_back(
            stopping::StoppingRule{stopping::SignificanceResolved{alpha, true}});
        reject_or_cap.rules.push_back(stopping::StoppingRule{stopping::Cap{n_max}});
        ts.push_back({"reject_or_cap", stopping::StoppingRule{std::move(reject_or_cap)}});
        stopping::FirstOf plateau_or_cap;
        plateau_or_cap.rules.push_back(
            stopping::StoppingRule{stopping::Plateau{std::min<std::uint64_t>(1000, n_max), 1e-6}});
        plateau_or_cap.rules.push_back(stopping::StoppingRule{stopping::Cap{n_max}});
        ts.push_back({"plateau_or_cap", stopping::StoppingRule{std::move(plateau_or_cap)}});
        return ts;
    };

    NullStudyResult result;
    result.rule_names = rule_names;
    result.records.resize(config.replications * 4);

    parallel_for(config.replications, config.threads, [&](std::uint64_t rep) {
        Xoshiro256ss p_rng(derive_seed(config.master_seed, 2 * rep));
        const double p_true = p_rng.uniform01();
        streams::SyntheticStream stream(p_true, derive_seed(config.master_seed, 2 * rep + 1));

        auto trackers = make_trackers();
        auto est = estimators::make_anytime(eps);
        stopping::Trajectory traj;
        traj.p_tilde.reserve(n_max);
        std::uint64_t first_violation_n = 0;  // 0 = none

        for (std::uint64_t n = 1; n <= n_max; ++n) {
            est = estimators::anytime_update(est, stream.next());
            traj.p_tilde.push_back(est.p_tilde);
            if (first_violation_n == 0 && est.p_tilde < p_true) first_violation_n = n;
            for (auto& t : trackers) {
                if (t.fired) continue;
                if (auto reason = stopping::should_stop(t.rule, traj, est.s, eps)) {
                    t.fired = true;
                    t.stop_n = n;
                    t.reason = *reason;
                    t.estimate = est.p_tilde;
                }
            }
        }

        for (std::size_t k = 0; k < trackers.size(); ++k) {
            const auto& t = trackers[k];
            RunRecord rec;
            rec.replication_index = rep;
            rec.rule = t.name;
            rec.p_true = p_true;
            rec.p_estimate = t.estimate;
            rec.n_used = t.stop_n;
            rec.stop_reason = t.reason;
            rec.ros_violation = first_violation_n != 0 && first_violation_n <= t.stop_n;
            result.records[rep * 4 + k] = std::move(rec);
        }
    });

    if (!config.output_path.empty()) {
        write_records_csv(config.output_path, result.records);
        nlohmann::json summary;
        summary["config"] = nlohmann::json::parse(config_to_json(config));
        summary["config_digest"] = config.digest_hex();
        for (std::size_t k = 0; k < rule_names.size(); ++k) {
            double mean_n = 0.0;
            std::uint64_t violations = 0;
            std::vector<double> estimates;
            estimates.reserve(config.replications);
            for (std::uint64_t rep = 0; rep < config.replications; ++rep) {
                const auto& rec = result.records[rep * 4 + k];
                mean_n += static_cast<double>(rec.n_used);
                violations += rec.ros_violation ? 1 : 0;
                estimates.push_back(rec.p_estimate);
            }
            mean_n /= static_cast<double>(config.replications);
            const auto dom = audit_uniform_dominance(std::move(estimates));
            summary["rules"][rule_names[k]] = {{"mean_n", mean_n},
                                               {"ros_violations", violations},
                                               {"dominance_sup_excess", dom.sup_excess},
                                               {"dominance_band", dom.band},
                                               {"dominance_pass", dom.pass}};
        }
        std::ofstream out(config.output_path + ".summary.json");
        if (!out) throw std::runtime_error("cannot open summary file");
        out << summary.dump(2) << "\n";
    }
    return result;
}

PlantGrowthResult plant_growth_study(const ExperimentConfig& config) {
    config.validate();
    PlantGrowthResult result;
    const auto data = perm::load_two_group_csv(config.data_path, config.group_a, config.group_b);
    result.exact = perm::exact_permutation_detail(data);
    result.p_star_used = config.p_override.value_or(result.exact.p_value);
    result.replications = config.replications;

    stopping::StoppingRule rule;
    if (config.rule) {
        rule = *config.rule;
    } else {
        stopping::FirstOf reject_or_cap;
        reject_or_cap.rules.push_back(
            stopping::StoppingRule{stopping::SignificanceResolved{config.alpha, true}});
        reject_or_cap.rules.push_back(stopping::StoppingRule{stopping::Cap{config.n_max}});
        rule.node = std::move(reject_or_cap);
    }

    result.records.resize(config.replications);
    parallel_for(config.replications, config.threads, [&](std::uint64_t rep) {
        streams::SyntheticStream stream(result.p_star_used,
                                        derive_seed(config.master_seed, rep));
        stopping::RunOptions opts;
        opts.hard_cap = std::max<std::uint64_t>(config.n_max, 1);
        auto run = stopping::run_until(stream, config.epsilon, rule, opts);
        RunRecord rec;
        rec.replication_index = rep;
        rec.rule = "reject_or_cap";
        rec.p_true = result.p_star_used;
        rec.p_estimate = run.report.estimate;
        rec.n_used = run.report.n_used;
        rec.stop_reason = run.report.stopping_reason;
        rec.ros_violation = false;
        result.records[rep] = std::move(rec);
    });

    double total_n = 0.0;
    std::uint64_t min_n = UINT64_MAX, max_n = 0, failures = 0;
    for (const auto& rec : result.records) {
        total_n += static_cast<double>(rec.n_used);
        min_n = std::min(min_n, rec.n_used);
        max_n = std::max(max_n, rec.n_used);
        if (rec.stop_reason != "significant") ++failures;
    }
    result.mean_n = total_n / static_cast<double>(config.replications);
    result.min_n = min_n;
    result.max_n = max_n;
    result.failures_to_reject = failures;

    if (!config.output_path.empty()) {
        write_records_csv(config.output_path, result.records);
        nlohmann::json summary{{"config_digest", config.digest_hex()},
                               {"exact_p_value", result.exact.p_value},
                               {"exact_exceed_count", result.exact.exceed_count},
                               {"exact_total_splits", result.exact.total_splits},
                               {"p_star_used", result.p_star_used},
                               {"mean_n", result.mean_n},
                               {"min_n", result.min_n},
                               {"max_n", result.max_n},
                               {"failures_to_reject", result.failures_to_reject}};
        summary["config"] = nlohmann::json::parse(config_to_json(config));
        std::ofstream out(config.output_path + ".summary.json");
        if (!out) throw std::runtime_error("cannot open summary file");
        out << summary.dump(2) << "\n";
    }
    return result;
}

RosAudit audit_ros(const std::vector<RunRecord>& records, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::domain_error("audit_ros: bad epsilon");
    RosAudit audit;
    audit.records = records.size();
    for (const auto& r : records) audit.violations += r.ros_violation ? 1 : 0;
    const double n = static_cast<double>(audit.records);
    audit.threshold = n * epsilon + 3.0 * std::sqrt(n * epsilon * (1.0 - epsilon));
    audit.pass = static_cast<double>(audit.violations) <= audit.threshold;
    return audit;
}

DominanceAudit audit_uniform_dominance(std::vector<double> estimates, double delta) {
    if (estimates.empty()) throw std::domain_error("audit_uniform_dominance: no estimates");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("audit_uniform_dominance: delta outside (0,1)");
    std::sort(estimates.begin(), estimates.end());
    const auto n = estimates.size();
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // ECDF jumps to (i+1)/n at the sorted sample point
        const double excess =
            static_cast<double>(i + 1) / static_cast<double>(n) - estimates[i];
        if (excess > sup) sup = excess;
    }
    DominanceAudit audit;
    audit.n = n;
    audit.sup_excess = sup;
    audit.band = std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
    audit.pass = sup <= audit.band;
    return audit;
}

ReplicationAudit audit_replication_disagreement(double p_true, double alpha, double epsilon,
                                                std::uint64_t pairs, std::uint64_t master_seed,
                                                std::uint64_t cap, int threads) {
    if (!(p_true >= 0.0 && p_true <= 1.0))
        throw std::domain_error("audit_replication: p_true outside [0,1]");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("audit_replication: alpha outside (0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("audit_replication: epsilon outside (0,1)");
    if (pairs < 1) throw std::domain_error("audit_replication: pairs must be >= 1");

    // Decide via the significance-resolved stopping time; at the cap, fall
    // back to the estimate's side of alpha.
    auto decide = [&](std::uint64_t seed) -> bool {
        streams::SyntheticStream stream(p_true, seed);
        auto est = estimators::make_anytime(epsilon);
        for (std::uint64_t n = 1; n <= cap; ++n) {
            est = estimators::anytime_update(est, stream.next());
            if (est.p_tilde <= alpha) return true;  // reject
            if (confseq::detail::lower_above(n, est.s, epsilon, alpha)) return false;
        }
        return est.p_tilde <= alpha;
    };

    std::vector<std::uint8_t> disagree(pairs, 0);
    parallel_for(pairs, threads, [&](std::uint64_t i) {
        const bool d1 = decide(derive_seed(master_seed, 2 * i));
        const bool d2 = decide(derive_seed(master_seed, 2 * i + 1));
        disagree[i] = d1 != d2 ? 1 : 0;
    });

    ReplicationAudit audit;
    audit.pairs = pairs;
    for (auto d : disagree) audit.disagreements += d;
    audit.rate = static_cast<double>(audit.disagreements) / static_cast<double>(pairs);
    const double two_eps = 2.0 * epsilon;
    audit.threshold =
        two_eps + 3.0 * std::sqrt(two_eps * (1.0 - two_eps) / static_cast<double>(pairs));
    audit.pass = audit.rate <= audit.threshold;
    return audit;
}

}  // namespace seqpv::harness
