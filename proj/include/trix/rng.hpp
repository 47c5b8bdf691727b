#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "trix/errors.hpp"

namespace trix {

// SplitMix64 (Vigna). Used only to expand seeds into generator states.
struct splitmix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

// SplitMix64 finalizer alone: a 64 -> 64 bit avalanche mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// xoshiro512** (Blackman & Vigna). 512-bit state, 64-bit output.
// The state must never be all zero; constructors substitute a fixed
// non-zero state if handed one.
class xoshiro512ss {
public:
    using state_type = std::array<std::uint64_t, 8>;

    explicit xoshiro512ss(const state_type& state) : s_(state) {
        bool all_zero = true;
        for (auto w : s_) all_zero &= (w == 0);
        if (all_zero) s_[0] = 0x9e3779b97f4a7c15ull;
    }

    // Expands a 64-bit seed through SplitMix64, the seeding discipline
    // recommended for the xoshiro family.
    static xoshiro512ss from_u64(std::uint64_t seed) {
        splitmix64 sm{seed};
        state_type st;
        for (auto& w : st) w = sm.next();
        return xoshiro512ss(st);
    }

    std::uint64_t next() {
        const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 11;

        s_[2] ^= s_[0];
        s_[5] ^= s_[1];
        s_[1] ^= s_[2];
        s_[7] ^= s_[3];
        s_[3] ^= s_[4];
        s_[4] ^= s_[6];
        s_[0] ^= s_[7];
        s_[6] ^= t;

        s_[6] = std::rotl(s_[6], 21);

        return result;
    }

    const state_type& state() const { return s_; }

private:
    state_type s_;
};

// Block-buffered OS entropy. Reads /dev/urandom in 32 KiB chunks and falls
// back to std::random_device where that is unavailable. Not seedable; used
// for cross-validation against the deterministic generator.
class os_entropy_source {
public:
    os_entropy_source() : dev_("/dev/urandom", std::ios::binary) {}

    std::uint64_t next() {
        if (pos_ == buf_.size()) refill();
        return buf_[pos_++];
    }

private:
    void refill() {
        if (dev_.is_open()) {
            dev_.read(reinterpret_cast<char*>(buf_.data()),
                      static_cast<std::streamsize>(buf_.size() * sizeof(std::uint64_t)));
            if (dev_.gcount() == static_cast<std::streamsize>(buf_.size() * sizeof(std::uint64_t))) {
                pos_ = 0;
                return;
            }
            dev_.close();
        }
        std::random_device rd;
        for (auto& w : buf_)
            w = (static_cast<std::uint64_t>(rd()) << 32) | rd();
        pos_ = 0;
    }

    std::ifstream dev_;
    std::array<std::uint64_t, 4096> buf_{};
    std::size_t pos_ = buf_.size();
};

enum class rng_algorithm { xoshiro512starstar, os_entropy };

inline std::string to_string(rng_algorithm a) {
    return a == rng_algorithm::xoshiro512starstar ? "xoshiro512ss" : "os";
}

inline rng_algorithm parse_rng_algorithm(const std::string& s) {
    if (s == "xoshiro512ss" || s == "xoshiro512starstar" || s == "xoshiro") {
        return rng_algorithm::xoshiro512starstar;
    }
    if (s == "os" || s == "os-entropy") return rng_algorithm::os_entropy;
    throw config_error("unknown rng algorithm: " + s);
}

// A single-owner random stream with a bit-level cache on top of the word
// generator. Bits are served LSB-first; a refill discards any remainder
// narrower than the requested width, so the call sequence alone determines
// consumption.
class rng_stream {
public:
    struct origin_info {
        std::uint64_t master_seed = 0;
        std::uint64_t sample_index = 0;
        bool derived = false;
    };

    explicit rng_stream(xoshiro512ss gen, origin_info origin = {})
        : gen_(gen), origin_(origin) {}

    static rng_stream os_entropy(origin_info origin = {}) { return rng_stream(tag_os{}, origin); }

    rng_algorithm algorithm() const {
        return std::holds_alternative<xoshiro512ss>(gen_)
                   ? rng_algorithm::xoshiro512starstar
                   : rng_algorithm::os_entropy;
    }

    const origin_info& origin() const { return origin_; }

    std::uint64_t next_u64() {
        if (auto* xo = std::get_if<xoshiro512ss>(&gen_)) return xo->next();
        return std::get<os_entropy_source>(gen_).next();
    }

    std::uint32_t next_bit() {
        if (cache_bits_ == 0) {
            cache_ = next_u64();
            cache_bits_ = 64;
        }
        const std::uint32_t b = static_cast<std::uint32_t>(cache_ & 1u);
        cache_ >>= 1;
        --cache_bits_;
        return b;
    }

    std::uint32_t next_two_bits() {
        if (cache_bits_ < 2) {
            cache_ = next_u64();
            cache_bits_ = 64;
        }
        const std::uint32_t b = static_cast<std::uint32_t>(cache_ & 3u);
        cache_ >>= 2;
        cache_bits_ -= 2;
        return b;
    }

    // Packs k <= 56 stream bits LSB-first into one word. Equivalent to k
    // successive next_bit() calls, including the cache state left behind.
    std::uint64_t next_bits(unsigned k) {
        std::uint64_t out = 0;
        unsigned got = 0;
        while (got < k) {
            if (cache_bits_ == 0) {
                cache_ = next_u64();
                cache_bits_ = 64;
            }
            const unsigned take = std::min<unsigned>(k - got, cache_bits_);
            out |= (cache_ & ((take == 64) ? ~0ull : ((1ull << take) - 1))) << got;
            cache_ >>= take;
            cache_bits_ -= take;
            got += take;
        }
        return out;
    }

private:
    struct tag_os {};
    explicit rng_stream(tag_os, origin_info origin) : gen_(os_entropy_source{}), origin_(origin) {}

    std::variant<xoshiro512ss, os_entropy_source> gen_;
    std::uint64_t cache_ = 0;
    unsigned cache_bits_ = 0;
    origin_info origin_;
};

// Derives an independent stream for one sample: the master seed is XOR-mixed
// with the avalanche of the sample index, then expanded through SplitMix64
// into the full 512-bit state. Distinct (seed, index) pairs collide only
// with negligible probability. For os-entropy the stream is fresh entropy
// and the origin is recorded for reporting only.
inline rng_stream derive_stream(std::uint64_t master_seed, std::uint64_t sample_index,
                                rng_algorithm alg = rng_algorithm::xoshiro512starstar) {
    rng_stream::origin_info origin{master_seed, sample_index, true};
    if (alg == rng_algorithm::os_entropy) return rng_stream::os_entropy(origin);
    return rng_stream(xoshiro512ss::from_u64(master_seed ^ mix64(sample_index)), origin);
}

} // namespace trix
