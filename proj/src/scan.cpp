#include "seqpv/scan.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace seqpv::scan {

void ScanProblem::validate() const {
    if (observed_counts.empty()) throw std::domain_error("scan: observed_counts empty");
    for (auto c : observed_counts)
        if (c < 0) throw std::domain_error("scan: negative observed count");
    if (!(mu0 > 0.0) || !std::isfinite(mu0)) throw std::domain_error("scan: mu0 must be positive");
    if (windows.empty()) throw std::domain_error("scan: window list empty");
    for (const auto& w : windows) {
        if (w.empty()) throw std::domain_error("scan: empty window");
        for (auto i : w)
            if (i >= observed_counts.size()) throw std::domain_error("scan: window index out of range");
    }
}

std::uint64_t ScanProblem::digest() const {
    std::string bytes = "scan|";
    bytes.append(streams::digest_hex(std::bit_cast<std::uint64_t>(mu0)));
    for (auto c : observed_counts) {
        bytes.push_back(',');
        bytes.append(std::to_string(c));
    }
    for (const auto& w : windows) {
        bytes.push_back('|');
        for (auto i : w) {
            bytes.push_back(',');
            bytes.append(std::to_string(i));
        }
    }
    return streams::fnv1a(bytes);
}

std::vector<std::vector<std::size_t>> contiguous_windows(std::size_t k, std::size_t min_len,
                                                         std::size_t max_len) {
    if (k == 0) throw std::domain_error("contiguous_windows: empty grid");
    if (min_len == 0) min_len = 1;
    if (max_len == 0 || max_len > k) max_len = k;
    if (min_len > max_len) throw std::domain_error("contiguous_windows: min_len > max_len");
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t len = min_len; len <= max_len; ++len) {
        for (std::size_t start = 0; start + len <= k; ++start) {
            std::vector<std::size_t> w(len);
            for (std::size_t i = 0; i < len; ++i) w[i] = start + i;
            out.push_back(std::move(w));
        }
    }
    return out;
}

namespace {

double statistic_unchecked(const ScanProblem& problem, const std::vector<std::int64_t>& counts) {
    double best = -INFINITY;
    for (const auto& w : problem.windows) {
        std::int64_t sum = 0;
        for (auto i : w) sum += counts[i];
        const double len = static_cast<double>(w.size());
        const double v = (static_cast<double>(sum) - len * problem.mu0) / std::sqrt(len);
        if (v > best) best = v;
    }
    return best;
}

}  // namespace

double scan_statistic(const ScanProblem& problem) {
    return scan_statistic(problem, problem.observed_counts);
}

double scan_statistic(const ScanProblem& problem, const std::vector<std::int64_t>& counts) {
    problem.validate();
    if (counts.size() != problem.observed_counts.size())
        throw std::domain_error("scan_statistic: counts size mismatch");
    return statistic_unchecked(problem, counts);
}

std::uint64_t sample_poisson(Xoshiro256ss& rng, double mu) {
    if (!(mu > 0.0)) throw std::domain_error("sample_poisson: mu must be positive");
    if (mu > 1e4) throw std::domain_error("sample_poisson: mu > 1e4 not supported in the demo");
    if (mu > 30.0) {
        const auto chunks = static_cast<std::uint64_t>(std::ceil(mu / 30.0));
        const double part = mu / static_cast<double>(chunks);
        std::uint64_t total = 0;
        for (std::uint64_t i = 0; i < chunks; ++i) total += sample_poisson(rng, part);
        return total;
    }
    // cdf walk; the iteration cap covers u within an O(1e-16) neighborhood of 1
    const double u = rng.uniform01();
    double pk = std::exp(-mu);
    double cum = pk;
    std::uint64_t k = 0;
    const std::uint64_t k_max = static_cast<std::uint64_t>(mu + 40.0 * std::sqrt(mu) + 60.0);
    while (u > cum && k < k_max) {
        ++k;
        pk *= mu / static_cast<double>(k);
        cum += pk;
    }
    return k;
}

ScanStream::ScanStream(ScanProblem problem, std::uint64_t seed)
    : OracleStream(seed), problem_(std::move(problem)) {
    problem_.validate();
    if (problem_.mu0 > 1e4) throw std::domain_error("scan_stream: mu0 > 1e4 not supported");
    observed_stat_ = scan_statistic(problem_);
    scratch_counts_.resize(problem_.observed_counts.size());
}

ScanStream::ScanStream(const streams::SampleState& st, ScanProblem problem)
    : OracleStream(st, "scan", problem.digest()), problem_(std::move(problem)) {
    problem_.validate();
    if (problem_.mu0 > 1e4) throw std::domain_error("scan_stream: mu0 > 1e4 not supported");
    observed_stat_ = scan_statistic(problem_);
    scratch_counts_.resize(problem_.observed_counts.size());
}

bool ScanStream::sample() {
    for (auto& c : scratch_counts_)
        c = static_cast<std::int64_t>(sample_poisson(rng_, problem_.mu0));
    return statistic_unchecked(problem_, scratch_counts_) >= observed_stat_;
}

}  // namespace seqpv::scan
