#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>

#include "seqpv/rng.hpp"

namespace seqpv::streams {

/// Snapshot of a calibration stream: the (n, s) sufficient statistic plus
/// everything needed to continue the exact bit sequence.
struct SampleState {
    std::string stream_kind;
    std::uint64_t master_seed = 0;
    std::uint64_t n = 0;  // draws so far
    std::uint64_t s = 0;  // ones so far
    std::string rng_algorithm;
    std::string rng_state;       // hex
    std::string problem_digest;  // hex
};

std::string to_json_string(const SampleState& st);
SampleState sample_state_from_json(const std::string& text);
void write_state_file(const std::string& path, const SampleState& st);
SampleState read_state_file(const std::string& path);

struct StateMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// FNV-1a 64-bit over a canonical byte string; identifies the problem
/// instance a stream was built from so resume catches mismatches.
std::uint64_t fnv1a(const std::string& bytes);
std::string digest_hex(std::uint64_t digest);
std::uint64_t digest_from_hex(const std::string& hex);

/// A resumable source of i.i.d. Bernoulli(p*) calibration bits. Single-owner
/// mutable state machine; not safe for concurrent mutation. Saved states are
/// plain values and may cross threads freely.
class OracleStream {
  public:
    virtual ~OracleStream() = default;

    bool next() {
        const bool bit = sample();
        ++n_;
        s_ += bit ? 1 : 0;
        return bit;
    }

    std::uint64_t draws() const { return n_; }
    std::uint64_t ones() const { return s_; }
    std::uint64_t master_seed() const { return master_seed_; }
    virtual const char* kind() const = 0;

    SampleState save_state() const {
        SampleState st;
        st.stream_kind = kind();
        st.master_seed = master_seed_;
        st.n = n_;
        st.s = s_;
        st.rng_algorithm = Xoshiro256ss::algorithm_name;
        st.rng_state = rng_.state_hex();
        st.problem_digest = digest_hex(problem_digest());
        return st;
    }

  protected:
    explicit OracleStream(std::uint64_t master_seed)
        : master_seed_(master_seed), rng_(master_seed) {}

    // Resume constructor; the derived class passes the digest of the problem
    // it was handed so a stale or mismatched state file fails loudly.
    OracleStream(const SampleState& st, const char* expected_kind, std::uint64_t expected_digest)
        : master_seed_(st.master_seed), rng_(Xoshiro256ss::from_state_hex(st.rng_state)) {
        if (st.stream_kind != expected_kind)
            throw StateMismatchError("stream kind mismatch: state is '" + st.stream_kind +
                                     "', expected '" + expected_kind + "'");
        if (!st.rng_algorithm.empty() && st.rng_algorithm != Xoshiro256ss::algorithm_name)
            throw StateMismatchError("unknown rng algorithm '" + st.rng_algorithm + "'");
        if (digest_from_hex(st.problem_digest) != expected_digest)
            throw StateMismatchError("problem digest mismatch: state was saved for a different "
                                     "problem instance");
        n_ = st.n;
        s_ = st.s;
    }

    virtual bool sample() = 0;
    virtual std::uint64_t problem_digest() const = 0;

    std::uint64_t master_seed_;
    Xoshiro256ss rng_;
    std::uint64_t n_ = 0;
    std::uint64_t s_ = 0;
};

/// Bernoulli(p_true) bits straight from the generator; the reference stream
/// for simulation studies where p* is set by hand.
class SyntheticStream final : public OracleStream {
  public:
    SyntheticStream(double p_true, std::uint64_t seed);
    SyntheticStream(const SampleState& st, double p_true);

    const char* kind() const override { return "synthetic"; }
    double p_true() const { return p_true_; }

    static std::uint64_t digest_of(double p_true);

  protected:
    bool sample() override { return rng_.uniform01() < p_true_; }
    std::uint64_t problem_digest() const override { return digest_of(p_true_); }

  private:
    double p_true_;
};

}  // namespace seqpv::streams

namespace seqpv {
// The stream interface is the seam between every module; keep it reachable
// without the nested qualifier.
using streams::OracleStream;
}  // namespace seqpv
