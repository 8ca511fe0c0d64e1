// seqpv: sequential Monte-Carlo p-value estimation and study harness.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqpv/harness.hpp"
#include "seqpv/scan.hpp"

namespace {

using namespace seqpv;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct StreamSpec {
    std::string kind = "synthetic";
    double p_true = 0.5;
    std::uint64_t seed = 1;
    std::string data_path;
    std::string group_a, group_b;
    std::string scan_file;
};

scan::ScanProblem load_scan_problem(const std::string& path) {
    const auto j = nlohmann::json::parse(slurp(path));
    scan::ScanProblem problem;
    problem.observed_counts = j.at("observed_counts").get<std::vector<std::int64_t>>();
    problem.mu0 = j.at("mu0").get<double>();
    if (j.contains("windows")) {
        problem.windows = j["windows"].get<std::vector<std::vector<std::size_t>>>();
    } else {
        const auto min_len = j.value("min_window", std::size_t{1});
        const auto max_len = j.value("max_window", std::size_t{0});
        problem.windows = scan::contiguous_windows(problem.observed_counts.size(), min_len, max_len);
    }
    problem.validate();
    return problem;
}

std::unique_ptr<OracleStream> make_stream(const StreamSpec& spec,
                                          const streams::SampleState* resume_state) {
    if (spec.kind == "synthetic") {
        if (resume_state) return std::make_unique<streams::SyntheticStream>(*resume_state, spec.p_true);
        return std::make_unique<streams::SyntheticStream>(spec.p_true, spec.seed);
    }
    if (spec.kind == "permutation") {
        if (spec.data_path.empty()) throw std::runtime_error("permutation stream needs --data");
        auto data = perm::load_two_group_csv(spec.data_path, spec.group_a, spec.group_b);
        if (resume_state) return std::make_unique<perm::PermutationStream>(*resume_state, std::move(data));
        return std::make_unique<perm::PermutationStream>(std::move(data), spec.seed);
    }
    if (spec.kind == "scan") {
        if (spec.scan_file.empty()) throw std::runtime_error("scan stream needs --scan-file");
        auto problem = load_scan_problem(spec.scan_file);
        if (resume_state) return std::make_unique<scan::ScanStream>(*resume_state, std::move(problem));
        return std::make_unique<scan::ScanStream>(std::move(problem), spec.seed);
    }
    throw std::runtime_error("unknown stream kind '" + spec.kind + "'");
}

stopping::StoppingRule parse_rule_arg(const std::string& arg) {
    if (!arg.empty() && arg.front() == '@') return stopping::rule_from_json(slurp(arg.substr(1)));
    return stopping::rule_from_json(arg);
}

int cmd_estimate(const StreamSpec& spec, const std::string& method, double epsilon, double alpha,
                 const std::string& rule_arg, std::uint64_t samples, std::uint64_t cap,
                 std::map<std::string, double> tuning, const std::string& trajectory_path,
                 const std::string& save_state_path, const std::string& resume_path) {
    if (method == "anytime") {
        stopping::StoppingRule rule;
        if (!rule_arg.empty()) {
            rule = parse_rule_arg(rule_arg);
        } else {
            stopping::FirstOf fo;
            fo.rules.push_back(stopping::StoppingRule{stopping::SignificanceResolved{alpha}});
            fo.rules.push_back(stopping::StoppingRule{stopping::Cap{cap}});
            rule.node = std::move(fo);
        }
        stopping::RunOptions opts;
        opts.hard_cap = cap;
        opts.record_rows = !trajectory_path.empty();

        stopping::RunResult run;
        std::unique_ptr<OracleStream> stream;
        bool append_trajectory = false;
        if (!resume_path.empty()) {
            const auto cp = stopping::read_checkpoint_file(resume_path);
            stream = make_stream(spec, &cp.stream_state);
            run = stopping::resume_until(*stream, cp, rule, opts);
            append_trajectory = true;
        } else {
            stream = make_stream(spec, nullptr);
            run = stopping::run_until(*stream, epsilon, rule, opts);
        }
        if (!trajectory_path.empty())
            stopping::write_trajectory_csv(trajectory_path, run.trajectory, append_trajectory);
        if (!save_state_path.empty())
            stopping::write_checkpoint_file(
                save_state_path,
                stopping::make_checkpoint(*stream, run.final_state, run.trajectory, rule));
        std::cout << estimators::to_json_string(run.report) << "\n";
        return 0;
    }

    auto stream = make_stream(spec, nullptr);
    estimators::EstimateReport rep;
    if (method == "naive" || method == "biased" || method == "randomized") {
        if (samples < 1) throw std::runtime_error("--samples must be >= 1 for fixed-m methods");
        for (std::uint64_t i = 0; i < samples; ++i) stream->next();
        const auto s = stream->ones();
        rep.method = method;
        rep.n_used = samples;
        rep.stopping_reason = "fixed_m";
        if (method == "naive") {
            rep.estimate = estimators::p_naive(s, samples);
        } else if (method == "biased") {
            rep.estimate = estimators::p_biased(s, samples);
        } else {
            Xoshiro256ss urng(derive_seed(spec.seed, 0xA11CEULL));
            const double u = urng.uniform01();
            rep.estimate = estimators::p_randomized(s, samples, u);
            rep.tuning["u"] = u;
        }
    } else if (method == "besag_clifford") {
        rep = estimators::besag_clifford(*stream, static_cast<std::uint64_t>(tuning.at("h")),
                                         static_cast<std::uint64_t>(tuning.at("M")));
    } else if (method == "silva_assuncao") {
        rep = estimators::silva_assuncao(*stream, static_cast<std::uint64_t>(tuning.at("h")),
                                         static_cast<std::uint64_t>(tuning.at("t1")),
                                         static_cast<std::uint64_t>(tuning.at("Ce")),
                                         static_cast<std::uint64_t>(tuning.at("M")));
    } else if (method == "andrews") {
        std::optional<double> f_inf;
        if (tuning.count("f_inf")) f_inf = tuning.at("f_inf");
        rep = estimators::andrews_three_step(*stream, tuning.at("d"), tuning.at("tau"), f_inf);
    } else if (method == "sprt") {
        rep = estimators::wald_sprt(*stream, alpha, tuning.at("delta"), tuning.at("eps0"),
                                    tuning.at("eps1"), static_cast<std::uint64_t>(tuning.at("M")));
    } else {
        throw std::runtime_error("unknown method '" + method + "'");
    }
    if (!save_state_path.empty())
        streams::write_state_file(save_state_path, stream->save_state());
    std::cout << estimators::to_json_string(rep) << "\n";
    return 0;
}

int cmd_audit(const std::string& kind, const std::string& input, double epsilon, double delta,
              double p_true, double alpha, std::uint64_t pairs, std::uint64_t seed,
              std::uint64_t cap, int threads) {
    nlohmann::json out;
    bool pass = false;
    if (kind == "ros") {
        const auto records = harness::read_records_csv(input);
        const auto a = harness::audit_ros(records, epsilon);
        out = {{"kind", "ros"},           {"records", a.records}, {"violations", a.violations},
               {"threshold", a.threshold}, {"pass", a.pass}};
        pass = a.pass;
    } else if (kind == "dominance") {
        const auto records = harness::read_records_csv(input);
        std::map<std::string, std::vector<double>> by_rule;
        for (const auto& r : records) by_rule[r.rule].push_back(r.p_estimate);
        if (by_rule.empty()) throw std::runtime_error("no records in " + input);
        pass = true;
        out["kind"] = "dominance";
        for (auto& [rule, estimates] : by_rule) {
            const auto a = harness::audit_uniform_dominance(std::move(estimates), delta);
            out["rules"][rule] = {{"n", a.n},
                                  {"sup_excess", a.sup_excess},
                                  {"band", a.band},
                                  {"pass", a.pass}};
            pass = pass && a.pass;
        }
        out["pass"] = pass;
    } else if (kind == "replication") {
        const auto a =
            harness::audit_replication_disagreement(p_true, alpha, epsilon, pairs, seed, cap, threads);
        out = {{"kind", "replication"},       {"pairs", a.pairs},
               {"disagreements", a.disagreements}, {"rate", a.rate},
               {"threshold", a.threshold},    {"pass", a.pass}};
        pass = a.pass;
    } else {
        throw std::runtime_error("unknown audit kind '" + kind + "'");
    }
    std::cout << out.dump(2) << "\n";
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential Monte-Carlo p-value estimation"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand("estimate", "run one estimator on one calibration stream");
    StreamSpec spec;
    std::string method = "anytime";
    double epsilon = 1e-5, alpha = 0.05;
    std::string rule_arg;
    std::uint64_t samples = 1000, cap = 10000000ULL;
    std::string trajectory_path, save_state_path, resume_path;
    double opt_h = 10, opt_M = 1000, opt_t1 = 500, opt_ce = 50;
    double opt_d = 0.2, opt_tau = 0.05, opt_delta = 0.01, opt_eps0 = 1e-3, opt_eps1 = 1e-3;
    std::optional<double> opt_f_inf;
    est->add_option("--stream", spec.kind, "synthetic | permutation | scan")
        ->check(CLI::IsMember({"synthetic", "permutation", "scan"}));
    est->add_option("--p-true", spec.p_true, "Bernoulli parameter for synthetic streams");
    est->add_option("--seed", spec.seed, "master seed");
    est->add_option("--data", spec.data_path, "two-column csv: group_label,value");
    est->add_option("--group-a", spec.group_a, "control label in --data");
    est->add_option("--group-b", spec.group_b, "treatment label in --data");
    est->add_option("--scan-file", spec.scan_file, "scan problem JSON");
    est->add_option("--method", method,
                    "naive|biased|randomized|anytime|besag_clifford|silva_assuncao|andrews|sprt");
    est->add_option("--epsilon", epsilon, "Monte-Carlo risk bound");
    est->add_option("--alpha", alpha, "significance level");
    est->add_option("--rule", rule_arg, "stopping rule JSON (or @file)");
    est->add_option("-n,--samples", samples, "sample size for naive/biased/randomized");
    est->add_option("--cap", cap, "hard sample cap");
    est->add_option("--h-ones", opt_h, "besag_clifford / silva_assuncao: ones threshold");
    est->add_option("--big-m", opt_M, "BC/SA/SPRT: maximum samples");
    est->add_option("--t1", opt_t1, "silva_assuncao: early-stop horizon");
    est->add_option("--ce", opt_ce, "silva_assuncao: rejection count threshold");
    est->add_option("--d", opt_d, "andrews: relative error target");
    est->add_option("--tau", opt_tau, "andrews: confidence parameter");
    est->add_option("--f-inf", opt_f_inf, "andrews: asymptotic cdf at the observed statistic");
    est->add_option("--delta", opt_delta, "sprt: separation from alpha");
    est->add_option("--eps0", opt_eps0, "sprt: error rate under the lower hypothesis");
    est->add_option("--eps1", opt_eps1, "sprt: error rate under the upper hypothesis");
    est->add_option("--trajectory", trajectory_path, "write per-step csv here");
    est->add_option("--save-state", save_state_path, "write resumable state here at stop");
    est->add_option("--resume-from", resume_path, "resume an anytime run from this checkpoint");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a configured study");
    std::string config_path;
    int sim_threads = 0;
    sim->add_option("--config", config_path, "ExperimentConfig JSON")->required();
    sim->add_option("--threads", sim_threads, "worker threads (0 = hardware)");

    // audit
    auto* aud = app.add_subcommand("audit", "validity audits over study records");
    std::string audit_kind, audit_input;
    double audit_eps = 1e-5, audit_delta = 1e-3, audit_p_true = 0.04, audit_alpha = 0.05;
    std::uint64_t audit_pairs = 10000, audit_seed = 1, audit_cap = 100000;
    int audit_threads = 0;
    aud->add_option("--kind", audit_kind, "ros | dominance | replication")
        ->required()
        ->check(CLI::IsMember({"ros", "dominance", "replication"}));
    aud->add_option("--input", audit_input, "records csv (ros, dominance)");
    aud->add_option("--epsilon", audit_eps, "risk bound");
    aud->add_option("--delta", audit_delta, "DKW band confidence (dominance)");
    aud->add_option("--p-true", audit_p_true, "replication: fixed true p-value");
    aud->add_option("--alpha", audit_alpha, "replication: significance level");
    aud->add_option("--pairs", audit_pairs, "replication: analyst pairs");
    aud->add_option("--seed", audit_seed, "replication: master seed");
    aud->add_option("--cap", audit_cap, "replication: per-run cap");
    aud->add_option("--threads", audit_threads, "worker threads");

    // thresholds
    auto* thr = app.add_subcommand("thresholds", "all-zero sample-size thresholds");
    double thr_eps = 1e-5, thr_alpha = 0.05;
    thr->add_option("--epsilon", thr_eps, "risk bound");
    thr->add_option("--alpha", thr_alpha, "significance level");

    // enumerate
    auto* enu = app.add_subcommand("enumerate", "exact permutation p-value by full enumeration");
    std::string enu_data, enu_a, enu_b;
    std::uint64_t enu_cap = 10000000ULL;
    enu->add_option("--data", enu_data, "two-column csv: group_label,value")->required();
    enu->add_option("--group-a", enu_a, "control label");
    enu->add_option("--group-b", enu_b, "treatment label");
    enu->add_option("--cap", enu_cap, "enumeration cap on the split count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (est->parsed()) {
            std::map<std::string, double> tuning{{"h", opt_h},     {"M", opt_M},
                                                 {"t1", opt_t1},   {"Ce", opt_ce},
                                                 {"d", opt_d},     {"tau", opt_tau},
                                                 {"delta", opt_delta}, {"eps0", opt_eps0},
                                                 {"eps1", opt_eps1}};
            if (opt_f_inf) tuning["f_inf"] = *opt_f_inf;
            return cmd_estimate(spec, method, epsilon, alpha, rule_arg, samples, cap, tuning,
                                trajectory_path, save_state_path, resume_path);
        }
        if (sim->parsed()) {
            auto config = harness::config_from_json(slurp(config_path));
            if (sim_threads > 0) config.threads = sim_threads;
            if (config.experiment == "null_study") {
                const auto result = harness::simulate_null_study(config);
                const auto ros = harness::audit_ros(result.records, config.epsilon);
                nlohmann::json out{{"experiment", "null_study"},
                                   {"records", result.records.size()},
                                   {"ros_violations", ros.violations},
                                   {"config_digest", config.digest_hex()}};
                std::cout << out.dump(2) << "\n";
            } else {
                const auto result = harness::plant_growth_study(config);
                nlohmann::json out{{"experiment", "plant_growth"},
                                   {"exact_p_value", result.exact.p_value},
                                   {"p_star_used", result.p_star_used},
                                   {"mean_n", result.mean_n},
                                   {"failures_to_reject", result.failures_to_reject},
                                   {"config_digest", config.digest_hex()}};
                std::cout << out.dump(2) << "\n";
            }
            return 0;
        }
        if (aud->parsed()) {
            if ((audit_kind == "ros" || audit_kind == "dominance") && audit_input.empty())
                throw std::runtime_error("--input is required for ros/dominance audits");
            return cmd_audit(audit_kind, audit_input, audit_eps, audit_delta, audit_p_true,
                             audit_alpha, audit_pairs, audit_seed, audit_cap, audit_threads);
        }
        if (thr->parsed()) {
            const auto t = harness::all_zero_thresholds(thr_eps, thr_alpha);
            nlohmann::json out{{"epsilon", thr_eps},
                               {"alpha", thr_alpha},
                               {"clopper_pearson_min_m", t.cp_min_m},
                               {"anytime_first_n", t.anytime_first_n},
                               {"clopper_pearson_epsilon_at_30", t.cp_epsilon_at_30}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }
        if (enu->parsed()) {
            const auto data = perm::load_two_group_csv(enu_data, enu_a, enu_b);
            const auto result = perm::exact_permutation_detail(data, enu_cap);
            nlohmann::json out{{"p_value", result.p_value},
                               {"exceed_count", result.exceed_count},
                               {"total_splits", result.total_splits},
                               {"exact_arithmetic", data.exact_arithmetic()}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
