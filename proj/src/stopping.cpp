#include "seqpv/stopping.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "seqpv/confidence.hpp"

namespace seqpv::stopping {

void validate_rule(const StoppingRule& rule) {
    std::visit(
        [](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, FixedN>) {
                if (node.n < 1) throw std::domain_error("fixed_n: n must be >= 1");
            } else if constexpr (std::is_same_v<T, SignificanceResolved>) {
                if (!(node.alpha > 0.0 && node.alpha < 1.0))
                    throw std::domain_error("significance_resolved: alpha outside (0,1)");
            } else if constexpr (std::is_same_v<T, Plateau>) {
                if (node.n0 < 1) throw std::domain_error("plateau: n0 must be >= 1");
                if (!(node.gamma >= 0.0)) throw std::domain_error("plateau: gamma must be >= 0");
            } else if constexpr (std::is_same_v<T, Cap>) {
                if (node.n_max < 1) throw std::domain_error("cap: n_max must be >= 1");
            } else {
                if (node.rules.empty()) throw std::domain_error("first_of: empty rule list");
                for (const auto& sub : node.rules) validate_rule(sub);
            }
        },
        rule.node);
}

std::uint64_t rule_memory(const StoppingRule& rule) {
    return std::visit(
        [](const auto& node) -> std::uint64_t {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Plateau>) {
                return node.n0;
            } else if constexpr (std::is_same_v<T, FirstOf>) {
                std::uint64_t mem = 0;
                for (const auto& sub : node.rules) mem = std::max(mem, rule_memory(sub));
                return mem;
            } else {
                return 0;
            }
        },
        rule.node);
}

namespace {

nlohmann::json rule_to_json_obj(const StoppingRule& rule) {
    return std::visit(
        [](const auto& node) -> nlohmann::json {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, FixedN>) {
                return {{"fixed_n", {{"n", node.n}}}};
            } else if constexpr (std::is_same_v<T, SignificanceResolved>) {
                return {{"significance_resolved",
                         {{"alpha", node.alpha}, {"reject_only", node.reject_only}}}};
            } else if constexpr (std::is_same_v<T, Plateau>) {
                return {{"plateau", {{"n0", node.n0}, {"gamma", node.gamma}}}};
            } else if constexpr (std::is_same_v<T, Cap>) {
                return {{"cap", {{"n_max", node.n_max}}}};
            } else {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& sub : node.rules) arr.push_back(rule_to_json_obj(sub));
                return {{"first_of", arr}};
            }
        },
        rule.node);
}

StoppingRule rule_from_json_obj(const nlohmann::json& j) {
    if (!j.is_object() || j.size() != 1)
        throw std::domain_error("stopping rule: expected a single-key tagged object");
    const auto& [key, body] = j.items().begin();
    StoppingRule rule;
    if (key == "fixed_n") {
        rule.node = FixedN{body.at("n").get<std::uint64_t>()};
    } else if (key == "significance_resolved") {
        SignificanceResolved sr;
        sr.alpha = body.at("alpha").get<double>();
        if (body.contains("reject_only")) sr.reject_only = body["reject_only"].get<bool>();
        rule.node = sr;
    } else if (key == "plateau") {
        rule.node = Plateau{body.at("n0").get<std::uint64_t>(), body.at("gamma").get<double>()};
    } else if (key == "cap") {
        rule.node = Cap{body.at("n_max").get<std::uint64_t>()};
    } else if (key == "first_of") {
        FirstOf fo;
        for (const auto& sub : body) fo.rules.push_back(rule_from_json_obj(sub));
        rule.node = std::move(fo);
    } else {
        throw std::domain_error("stopping rule: unknown tag '" + key + "'");
    }
    return rule;
}

}  // namespace

StoppingRule rule_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::domain_error(std::string("stopping rule: invalid JSON: ") + e.what());
    }
    StoppingRule rule = rule_from_json_obj(j);
    validate_rule(rule);
    return rule;
}

std::string rule_to_json(const StoppingRule& rule) { return rule_to_json_obj(rule).dump(); }

std::optional<std::string> should_stop(const StoppingRule& rule, const Trajectory& trajectory,
                                       std::uint64_t s, double epsilon) {
    if (trajectory.p_tilde.empty()) throw std::domain_error("should_stop: empty trajectory");
    const std::uint64_t n = trajectory.current_step();
    return std::visit(
        [&](const auto& node) -> std::optional<std::string> {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, FixedN>) {
                if (n >= node.n) return "fixed_n";
            } else if constexpr (std::is_same_v<T, SignificanceResolved>) {
                if (trajectory.p_tilde_at(n) <= node.alpha) return "significant";
                if (!node.reject_only &&
                    confseq::detail::lower_above(n, s, epsilon, node.alpha))
                    return "confident_insignificant";
            } else if constexpr (std::is_same_v<T, Plateau>) {
                if (n > node.n0) {
                    const std::uint64_t back = n - node.n0;
                    if (!trajectory.covers(back))
                        throw std::domain_error(
                            "plateau: trajectory history does not reach back n0 steps "
                            "(resumed with a shorter checkpoint tail?)");
                    const double decrease = trajectory.p_tilde_at(back) - trajectory.p_tilde_at(n);
                    if (decrease / static_cast<double>(node.n0) <= node.gamma) return "plateau";
                }
            } else if constexpr (std::is_same_v<T, Cap>) {
                if (n >= node.n_max) return "cap";
            } else {
                for (const auto& sub : node.rules)
                    if (auto r = should_stop(sub, trajectory, s, epsilon)) return r;
            }
            return std::nullopt;
        },
        rule.node);
}

namespace {

RunResult drive(OracleStream& stream, estimators::AnytimeEstimate est, Trajectory traj,
                const StoppingRule& rule, const RunOptions& options) {
    validate_rule(rule);
    RunResult out;
    for (;;) {
        const bool bit = stream.next();
        est = estimators::anytime_update(est, bit);
        traj.p_tilde.push_back(est.p_tilde);
        if (options.record_rows) {
            StepRow row;
            row.n = est.n;
            row.s = est.s;
            row.upper = confseq::robbins_upper(est.n, est.s, est.epsilon);
            row.lower = confseq::robbins_lower(est.n, est.s, est.epsilon);
            row.p_tilde = est.p_tilde;
            traj.rows.push_back(row);
        }
        if (auto reason = should_stop(rule, traj, est.s, est.epsilon)) {
            traj.stop_reason = *reason;
            break;
        }
        if (est.n >= options.hard_cap) {
            traj.stop_reason = "hard_cap";
            break;
        }
    }
    traj.stop_index = est.n;

    estimators::EstimateReport rep;
    rep.method = "anytime";
    rep.estimate = est.p_tilde;
    rep.n_used = est.n;
    rep.epsilon = est.epsilon;
    rep.stopping_reason = traj.stop_reason;
    rep.lower_context = confseq::robbins_lower(est.n, est.s, est.epsilon);
    out.trajectory = std::move(traj);
    out.report = std::move(rep);
    out.final_state = est;
    return out;
}

}  // namespace

RunResult run_until(OracleStream& stream, double epsilon, const StoppingRule& rule,
                    RunOptions options) {
    if (stream.draws() != 0)
        throw std::domain_error("run_until: stream already consumed; use resume_until");
    Trajectory traj;
    return drive(stream, estimators::make_anytime(epsilon), std::move(traj), rule, options);
}

RunCheckpoint make_checkpoint(const OracleStream& stream, const estimators::AnytimeEstimate& est,
                              const Trajectory& trajectory, const StoppingRule& rule) {
    RunCheckpoint cp;
    cp.stream_state = stream.save_state();
    cp.epsilon = est.epsilon;
    cp.running_min_upper = est.running_min_upper;
    const std::uint64_t keep = std::min<std::uint64_t>(rule_memory(rule),
                                                       trajectory.p_tilde.size());
    cp.p_tilde_tail.assign(trajectory.p_tilde.end() - static_cast<std::ptrdiff_t>(keep),
                           trajectory.p_tilde.end());
    cp.tail_first_step = trajectory.current_step() - keep + 1;
    return cp;
}

std::string checkpoint_to_json(const RunCheckpoint& cp) {
    nlohmann::json j;
    j["stream"] = nlohmann::json::parse(streams::to_json_string(cp.stream_state));
    j["epsilon"] = cp.epsilon;
    j["running_min_upper"] = cp.running_min_upper;
    j["p_tilde_tail"] = cp.p_tilde_tail;
    j["tail_first_step"] = cp.tail_first_step;
    return j.dump(2);
}

RunCheckpoint checkpoint_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    RunCheckpoint cp;
    cp.stream_state = streams::sample_state_from_json(j.at("stream").dump());
    cp.epsilon = j.at("epsilon").get<double>();
    cp.running_min_upper = j.at("running_min_upper").get<double>();
    cp.p_tilde_tail = j.at("p_tilde_tail").get<std::vector<double>>();
    cp.tail_first_step = j.at("tail_first_step").get<std::uint64_t>();
    return cp;
}

void write_checkpoint_file(const std::string& path, const RunCheckpoint& cp) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out << checkpoint_to_json(cp) << "\n";
}

RunCheckpoint read_checkpoint_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_json(buf.str());
}

void write_trajectory_csv(const std::string& path, const Trajectory& trajectory, bool append) {
    std::ofstream out(path, append ? std::ios::app : std::ios::out);
    if (!out) throw std::runtime_error("cannot open trajectory csv: " + path);
    if (!append) out << "n,s,upper,lower,p_tilde\n";
    char buf[160];
    for (const auto& r : trajectory.rows) {
        std::snprintf(buf, sizeof buf, "%llu,%llu,%.17g,%.17g,%.17g\n",
                      static_cast<unsigned long long>(r.n), static_cast<unsigned long long>(r.s),
                      r.upper, r.lower, r.p_tilde);
        out << buf;
    }
}

RunResult resume_until(OracleStream& stream, const RunCheckpoint& cp, const StoppingRule& rule,
                       RunOptions options) {
    if (stream.draws() != cp.stream_state.n)
        throw std::domain_error("resume_until: stream position does not match the checkpoint");
    estimators::AnytimeEstimate est = estimators::make_anytime(cp.epsilon);
    est.n = cp.stream_state.n;
    est.s = cp.stream_state.s;
    est.running_min_upper = cp.running_min_upper;
    est.p_tilde = std::min(1.0, est.running_min_upper + est.epsilon);

    // A plateau lag of n0 consults history back to step n - n0, so the tail
    // must hold min(n_saved, n0) values.
    const std::uint64_t needed = std::min(rule_memory(rule), cp.stream_state.n);
    if (cp.p_tilde_tail.size() < needed)
        throw std::domain_error(
            "resume_until: checkpoint keeps less p_tilde history than the rule needs");

    Trajectory traj;
    traj.p_tilde = cp.p_tilde_tail;
    traj.first_step = cp.tail_first_step;
    if (traj.p_tilde.empty()) traj.first_step = cp.stream_state.n + 1;
    return drive(stream, est, std::move(traj), rule, options);
}

}  // namespace seqpv::stopping
