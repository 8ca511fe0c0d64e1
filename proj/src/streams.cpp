#include "seqpv/streams.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace seqpv::streams {

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string digest_hex(std::uint64_t digest) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[digest & 0xF];
        digest >>= 4;
    }
    return out;
}

std::uint64_t digest_from_hex(const std::string& hex) {
    if (hex.size() != 16) throw StateMismatchError("problem digest: expected 16 hex chars");
    std::uint64_t v = 0;
    for (char c : hex) {
        std::uint64_t d;
        if (c >= '0' && c <= '9') d = static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') d = static_cast<std::uint64_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') d = static_cast<std::uint64_t>(c - 'A' + 10);
        else throw StateMismatchError("problem digest: invalid hex digit");
        v = (v << 4) | d;
    }
    return v;
}

std::string to_json_string(const SampleState& st) {
    nlohmann::json j{{"stream_kind", st.stream_kind}, {"master_seed", st.master_seed},
                     {"n", st.n},                     {"s", st.s},
                     {"rng_algorithm", st.rng_algorithm}, {"rng_state", st.rng_state},
                     {"problem_digest", st.problem_digest}};
    return j.dump(2);
}

SampleState sample_state_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw StateMismatchError(std::string("state file is not valid JSON: ") + e.what());
    }
    SampleState st;
    try {
        st.stream_kind = j.at("stream_kind").get<std::string>();
        st.master_seed = j.at("master_seed").get<std::uint64_t>();
        st.n = j.at("n").get<std::uint64_t>();
        st.s = j.at("s").get<std::uint64_t>();
        st.rng_state = j.at("rng_state").get<std::string>();
        st.problem_digest = j.at("problem_digest").get<std::string>();
        if (j.contains("rng_algorithm")) st.rng_algorithm = j["rng_algorithm"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw StateMismatchError(std::string("state file missing field: ") + e.what());
    }
    if (st.s > st.n) throw StateMismatchError("state file corrupt: s > n");
    return st;
}

void write_state_file(const std::string& path, const SampleState& st) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open state file for writing: " + path);
    out << to_json_string(st) << "\n";
}

SampleState read_state_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open state file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return sample_state_from_json(buf.str());
}

SyntheticStream::SyntheticStream(double p_true, std::uint64_t seed)
    : OracleStream(seed), p_true_(p_true) {
    if (!(p_true >= 0.0 && p_true <= 1.0))
        throw std::domain_error("synthetic_stream: p_true outside [0,1]");
}

SyntheticStream::SyntheticStream(const SampleState& st, double p_true)
    : OracleStream(st, "synthetic", digest_of(p_true)), p_true_(p_true) {}

std::uint64_t SyntheticStream::digest_of(double p_true) {
    std::string bytes = "synthetic|";
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(p_true);
    bytes.append(digest_hex(bits));
    return fnv1a(bytes);
}

}  // namespace seqpv::streams
