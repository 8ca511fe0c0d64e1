#pragma once
#include <cstdint>
#include <vector>

#include "seqpv/streams.hpp"

namespace seqpv::scan {

/// A homogeneous-Poisson null with candidate cluster windows. The demo is
/// one-dimensional: windows are index subsets of the cell grid, usually built
/// with contiguous_windows().
struct ScanProblem {
    std::vector<std::int64_t> observed_counts;
    double mu0 = 1.0;
    std::vector<std::vector<std::size_t>> windows;

    void validate() const;  // throws std::domain_error on violated invariants
    std::uint64_t digest() const;
};

/// All contiguous index intervals of length in [min_len, max_len] over a grid
/// of k cells. max_len = 0 means "up to k".
std::vector<std::vector<std::size_t>> contiguous_windows(std::size_t k, std::size_t min_len = 1,
                                                         std::size_t max_len = 0);

/// max over windows A of (sum_{i in A} x_i - |A| mu0) / sqrt(|A|).
double scan_statistic(const ScanProblem& problem);
double scan_statistic(const ScanProblem& problem, const std::vector<std::int64_t>& counts);

/// Poisson draw by cdf inversion, exact and deterministic given the
/// generator. mu above 30 is split into chunks of mean <= 30 and summed;
/// mu above 1e4 is rejected (the demo has no business there).
std::uint64_t sample_poisson(Xoshiro256ss& rng, double mu);

/// Bits indicating {scan(simulated null field) >= scan(observed)}; ties count
/// as exceedances.
class ScanStream final : public OracleStream {
  public:
    ScanStream(ScanProblem problem, std::uint64_t seed);
    ScanStream(const streams::SampleState& st, ScanProblem problem);

    const char* kind() const override { return "scan"; }
    double observed_statistic() const { return observed_stat_; }

  protected:
    bool sample() override;
    std::uint64_t problem_digest() const override { return problem_.digest(); }

  private:
    ScanProblem problem_;
    double observed_stat_;
    std::vector<std::int64_t> scratch_counts_;
};

}  // namespace seqpv::scan
