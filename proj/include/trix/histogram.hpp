#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "trix/errors.hpp"

namespace trix {

// Integer-indexed counts of an integer-valued statistic in scaled time
// units. Moments are accumulated in 128-bit integer arithmetic; floating
// point enters only in the final division.
struct histogram {
    std::int64_t offset = 0;           // value represented by counts[0]
    std::vector<std::uint64_t> counts;
    std::uint64_t n = 0;               // always equals sum(counts)

    static histogram from_values(std::span<const std::int64_t> values) {
        histogram h;
        for (auto v : values) h.add(v);
        h.trim();
        return h;
    }

    static histogram from_counts(std::int64_t offset, std::vector<std::uint64_t> counts) {
        histogram h;
        h.offset = offset;
        h.counts = std::move(counts);
        for (auto c : h.counts) h.n += c;
        h.trim();
        return h;
    }

    bool empty() const { return n == 0; }
    std::int64_t min_value() const { return offset; }
    std::int64_t max_value() const { return offset + static_cast<std::int64_t>(counts.size()) - 1; }

    std::uint64_t count_at(std::int64_t v) const {
        if (v < offset || v > max_value()) return 0;
        return counts[static_cast<std::size_t>(v - offset)];
    }

    double phat(std::int64_t v) const {
        if (n == 0) return 0.0;
        return static_cast<double>(count_at(v)) / static_cast<double>(n);
    }

    void add(std::int64_t v, std::uint64_t c = 1) {
        if (counts.empty()) {
            offset = v;
            counts.push_back(0);
        } else if (v < offset) {
            counts.insert(counts.begin(), static_cast<std::size_t>(offset - v), 0);
            offset = v;
        } else if (v > max_value()) {
            counts.resize(static_cast<std::size_t>(v - offset) + 1, 0);
        }
        counts[static_cast<std::size_t>(v - offset)] += c;
        n += c;
    }

    // Offset-aligned count addition; associative and commutative, so merges
    // are independent of worker partitioning.
    void merge(const histogram& other) {
        for (std::size_t i = 0; i < other.counts.size(); ++i) {
            if (other.counts[i] != 0) {
                add(other.offset + static_cast<std::int64_t>(i), other.counts[i]);
            }
        }
    }

    // Drops zero-count ends so the first and last entries are nonzero.
    void trim() {
        std::size_t lo = 0, hi = counts.size();
        while (lo < hi && counts[lo] == 0) ++lo;
        while (hi > lo && counts[hi - 1] == 0) --hi;
        counts.erase(counts.begin() + static_cast<std::ptrdiff_t>(hi), counts.end());
        counts.erase(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(lo));
        offset += static_cast<std::int64_t>(lo);
        if (counts.empty()) offset = 0;
    }

    double mean() const {
        if (n == 0) throw config_error("mean of an empty histogram");
        __int128 sum = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            sum += static_cast<__int128>(counts[i]) * (offset + static_cast<std::int64_t>(i));
        }
        return static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(n));
    }

    // Sample standard deviation with Bessel's correction:
    // sqrt((n * sum(v^2) - sum(v)^2) / (n * (n - 1))).
    double stddev() const {
        if (n < 2) throw config_error("stddev requires at least two samples");
        __int128 sum = 0, sumsq = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const std::int64_t v = offset + static_cast<std::int64_t>(i);
            const __int128 c = static_cast<__int128>(counts[i]);
            sum += c * v;
            sumsq += c * v * v;
        }
        const __int128 num = static_cast<__int128>(n) * sumsq - sum * sum;
        const long double den = static_cast<long double>(n) * static_cast<long double>(n - 1);
        return static_cast<double>(std::sqrt(static_cast<long double>(num) / den));
    }

    bool operator==(const histogram&) const = default;
};

inline double empirical_stddev(const histogram& h) { return h.stddev(); }

inline double empirical_stddev(std::span<const std::int64_t> values) {
    return histogram::from_values(values).stddev();
}

} // namespace trix
