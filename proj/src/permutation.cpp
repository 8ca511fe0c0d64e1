#include "seqpv/permutation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace seqpv::perm {

namespace {

// Smallest power-of-ten scale turning every value into an int64, if any.
// The tolerance is absolute: at scale 10^9 a relative test would wave
// anything through.
std::optional<std::vector<std::int64_t>> try_scale(const std::vector<double>& values) {
    double scale = 1.0;
    for (int digits = 0; digits <= 9; ++digits, scale *= 10.0) {
        bool ok = true;
        std::vector<std::int64_t> scaled;
        scaled.reserve(values.size());
        for (double v : values) {
            const double x = v * scale;
            if (std::fabs(x) > 1e12) {
                ok = false;
                break;
            }
            const double r = std::nearbyint(x);
            if (std::fabs(x - r) > 1e-6) {
                ok = false;
                break;
            }
            scaled.push_back(static_cast<std::int64_t>(r));
        }
        if (ok) return scaled;
    }
    return std::nullopt;
}

// C(n,k) capped: returns nullopt when the count exceeds cap.
std::optional<std::uint64_t> choose_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;  // exact: product of i consecutive integers divides by i!
        if (c > static_cast<unsigned __int128>(cap)) return std::nullopt;
    }
    return static_cast<std::uint64_t>(c);
}

}  // namespace

PermutationDataset::PermutationDataset(std::vector<double> a, std::vector<double> b)
    : group_a(std::move(a)), group_b(std::move(b)) {
    if (group_a.empty() || group_b.empty())
        throw std::domain_error("permutation dataset: both groups must be non-empty");
    for (double v : group_a)
        if (!std::isfinite(v)) throw std::domain_error("permutation dataset: non-finite value");
    for (double v : group_b)
        if (!std::isfinite(v)) throw std::domain_error("permutation dataset: non-finite value");
    combined_ = group_a;
    combined_.insert(combined_.end(), group_b.begin(), group_b.end());
    scaled_ = try_scale(combined_);
}

std::uint64_t PermutationDataset::digest() const {
    std::string bytes = "permutation|";
    bytes.append(std::to_string(group_a.size()));
    for (double v : combined_) {
        bytes.push_back(',');
        bytes.append(streams::digest_hex(std::bit_cast<std::uint64_t>(v)));
    }
    return streams::fnv1a(bytes);
}

double PermutationDataset::observed_statistic() const {
    const double ma = std::accumulate(group_a.begin(), group_a.end(), 0.0) /
                      static_cast<double>(group_a.size());
    const double mb = std::accumulate(group_b.begin(), group_b.end(), 0.0) /
                      static_cast<double>(group_b.size());
    return mb - ma;
}

// T(relabelled) >= T(observed) reduces to comparing the treatment-subset sum
// against the observed treatment sum: with nb fixed, T is an increasing
// affine function of that sum.
ExactPermutationResult exact_permutation_detail(const PermutationDataset& data,
                                                std::uint64_t enumeration_cap) {
    const std::size_t na = data.group_a.size();
    const std::size_t nb = data.group_b.size();
    const std::size_t n = na + nb;
    const auto total = choose_capped(n, nb, enumeration_cap);
    if (!total)
        throw std::domain_error("exact_permutation_pvalue: C(" + std::to_string(n) + "," +
                                std::to_string(nb) + ") exceeds enumeration cap " +
                                std::to_string(enumeration_cap));

    // Lexicographic walk over all nb-subsets with incrementally maintained sums.
    std::vector<std::size_t> idx(nb);
    std::iota(idx.begin(), idx.end(), 0);

    std::uint64_t exceed = 0;
    if (data.scaled()) {
        const auto& vals = *data.scaled();
        std::int64_t obs = 0;
        for (std::size_t i = na; i < n; ++i) obs += vals[i];
        std::int64_t sum = 0;
        for (std::size_t i = 0; i < nb; ++i) sum += vals[idx[i]];
        for (;;) {
            if (sum >= obs) ++exceed;
            std::size_t i = nb;
            while (i > 0 && idx[i - 1] == n - nb + (i - 1)) --i;
            if (i == 0) break;
            --i;
            sum -= vals[idx[i]];
            ++idx[i];
            sum += vals[idx[i]];
            for (std::size_t j = i + 1; j < nb; ++j) {
                sum -= vals[idx[j]];
                idx[j] = idx[j - 1] + 1;
                sum += vals[idx[j]];
            }
        }
    } else {
        const auto& vals = data.combined();
        long double obs = 0.0L;
        for (std::size_t i = na; i < n; ++i) obs += static_cast<long double>(vals[i]);
        long double sum = 0.0L;
        for (std::size_t i = 0; i < nb; ++i) sum += static_cast<long double>(vals[idx[i]]);
        for (;;) {
            if (sum >= obs) ++exceed;
            std::size_t i = nb;
            while (i > 0 && idx[i - 1] == n - nb + (i - 1)) --i;
            if (i == 0) break;
            --i;
            sum -= static_cast<long double>(vals[idx[i]]);
            ++idx[i];
            sum += static_cast<long double>(vals[idx[i]]);
            for (std::size_t j = i + 1; j < nb; ++j) {
                sum -= static_cast<long double>(vals[idx[j]]);
                idx[j] = idx[j - 1] + 1;
                sum += static_cast<long double>(vals[idx[j]]);
            }
        }
    }

    ExactPermutationResult res;
    res.exceed_count = exceed;
    res.total_splits = *total;
    res.p_value = static_cast<double>(exceed) / static_cast<double>(*total);
    return res;
}

double exact_permutation_pvalue(const PermutationDataset& data, std::uint64_t enumeration_cap) {
    return exact_permutation_detail(data, enumeration_cap).p_value;
}

PermutationStream::PermutationStream(PermutationDataset data, std::uint64_t seed)
    : OracleStream(seed), data_(std::move(data)) {
    init();
}

PermutationStream::PermutationStream(const streams::SampleState& st, PermutationDataset data)
    : OracleStream(st, "permutation", data.digest()), data_(std::move(data)) {
    init();
}

void PermutationStream::init() {
    index_buf_.resize(data_.combined().size());
    const std::size_t na = data_.group_a.size();
    if (data_.scaled()) {
        for (std::size_t i = na; i < data_.scaled()->size(); ++i)
            observed_sum_i_ += (*data_.scaled())[i];
    } else {
        for (std::size_t i = na; i < data_.combined().size(); ++i)
            observed_sum_f_ += static_cast<long double>(data_.combined()[i]);
    }
}

bool PermutationStream::sample() {
    const std::size_t n = index_buf_.size();
    const std::size_t nb = data_.group_b.size();
    std::iota(index_buf_.begin(), index_buf_.end(), std::size_t{0});
    // partial Fisher-Yates: first nb entries become the relabelled treatment
    if (data_.scaled()) {
        const auto& vals = *data_.scaled();
        std::int64_t sum = 0;
        for (std::size_t j = 0; j < nb; ++j) {
            const std::size_t k = j + static_cast<std::size_t>(rng_.uniform_below(n - j));
            std::swap(index_buf_[j], index_buf_[k]);
            sum += vals[index_buf_[j]];
        }
        return sum >= observed_sum_i_;
    }
    const auto& vals = data_.combined();
    long double sum = 0.0L;
    for (std::size_t j = 0; j < nb; ++j) {
        const std::size_t k = j + static_cast<std::size_t>(rng_.uniform_below(n - j));
        std::swap(index_buf_[j], index_buf_[k]);
        sum += static_cast<long double>(vals[index_buf_[j]]);
    }
    return sum >= observed_sum_f_;
}

PermutationDataset load_two_group_csv(const std::string& path, const std::string& label_a,
                                      const std::string& label_b) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv: " + path);

    auto trim = [](std::string s) {
        const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
        while (!s.empty() && is_space(s.back())) s.pop_back();
        std::size_t i = 0;
        while (i < s.size() && is_space(s[i])) ++i;
        return s.substr(i);
    };

    std::vector<std::string> labels_in_order;
    std::vector<std::pair<std::string, double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'group_label,value'");
        const std::string label = trim(line.substr(0, comma));
        const std::string value_text = trim(line.substr(comma + 1));
        double value;
        try {
            std::size_t used = 0;
            value = std::stod(value_text, &used);
            if (used != value_text.size()) throw std::invalid_argument(value_text);
        } catch (const std::exception&) {
            if (line_no == 1) continue;  // header row
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": cannot parse value '" + value_text + "'");
        }
        if (std::find(labels_in_order.begin(), labels_in_order.end(), label) ==
            labels_in_order.end())
            labels_in_order.push_back(label);
        rows.emplace_back(label, value);
    }

    std::string la = label_a;
    std::string lb = label_b;
    if (la.empty() && lb.empty()) {
        if (labels_in_order.size() != 2)
            throw std::runtime_error(path + ": found " + std::to_string(labels_in_order.size()) +
                                     " group labels; pass explicit labels to select two");
        la = labels_in_order[0];
        lb = labels_in_order[1];
    } else if (la.empty() || lb.empty()) {
        throw std::runtime_error("load_two_group_csv: pass both labels or neither");
    }

    std::vector<double> a, b;
    for (const auto& [label, value] : rows) {
        if (label == la) a.push_back(value);
        else if (label == lb) b.push_back(value);
    }
    if (a.empty()) throw std::runtime_error(path + ": no rows with label '" + la + "'");
    if (b.empty()) throw std::runtime_error(path + ": no rows with label '" + lb + "'");
    return PermutationDataset(std::move(a), std::move(b));
}

}  // namespace seqpv::perm
