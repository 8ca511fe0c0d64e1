#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqpv/streams.hpp"

namespace seqpv::perm {

/// Two-sample dataset for a label-permutation test. The statistic throughout
/// is T = mean(group_b) - mean(group_a), group_b playing the treatment role,
/// and exceedances are counted with ">=" so exact ties matter.
///
/// When every value is a short decimal (scaled by a power of ten it becomes
/// an integer), comparisons run on exact int64 sums. Otherwise sums fall back
/// to extended precision, where mathematically tied relabellings of
/// inexactly-representable data may misclassify at the last ulp.
struct PermutationDataset {
    std::vector<double> group_a;  // control
    std::vector<double> group_b;  // treatment

    PermutationDataset(std::vector<double> a, std::vector<double> b);

    std::uint64_t digest() const;
    bool exact_arithmetic() const { return static_cast<bool>(scaled_); }

    /// T(x) = mean(group_b) - mean(group_a).
    double observed_statistic() const;

    // Exposed for the enumeration and stream internals: combined values
    // [group_a..., group_b...], optionally as exactly scaled integers.
    const std::vector<double>& combined() const { return combined_; }
    const std::optional<std::vector<std::int64_t>>& scaled() const { return scaled_; }

  private:
    std::vector<double> combined_;
    std::optional<std::vector<std::int64_t>> scaled_;
};

struct ExactPermutationResult {
    std::uint64_t exceed_count = 0;  // splits with T(relabelled) >= T(observed)
    std::uint64_t total_splits = 0;  // C(|a|+|b|, |b|)
    double p_value = 1.0;
};

/// Exact p-value by complete enumeration of all group-size-preserving
/// relabellings. Refuses when C(|a|+|b|, |b|) exceeds enumeration_cap.
ExactPermutationResult exact_permutation_detail(const PermutationDataset& data,
                                                std::uint64_t enumeration_cap = 10000000ULL);
double exact_permutation_pvalue(const PermutationDataset& data,
                                std::uint64_t enumeration_cap = 10000000ULL);

/// Bits indicating {T(uniformly relabelled data) >= T(observed)}.
class PermutationStream final : public OracleStream {
  public:
    PermutationStream(PermutationDataset data, std::uint64_t seed);
    PermutationStream(const streams::SampleState& st, PermutationDataset data);

    const char* kind() const override { return "permutation"; }

  protected:
    bool sample() override;
    std::uint64_t problem_digest() const override { return data_.digest(); }

  private:
    void init();
    PermutationDataset data_;
    std::vector<std::size_t> index_buf_;
    std::int64_t observed_sum_i_ = 0;
    long double observed_sum_f_ = 0.0L;
};

/// Loads a two-column CSV (group_label,value). With explicit labels, rows
/// with other labels are ignored; without, the file must contain exactly two
/// distinct labels, assigned in first-appearance order.
PermutationDataset load_two_group_csv(const std::string& path, const std::string& label_a = "",
                                      const std::string& label_b = "");

}  // namespace seqpv::perm
