#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <thread>
#include <vector>

#include "trix/errors.hpp"
#include "trix/grid.hpp"
#include "trix/model.hpp"

namespace trix {

// Exact probability as a reduced integer fraction.
struct rational {
    std::int64_t num = 0;
    std::uint64_t den = 1;

    static rational make(std::int64_t num, std::uint64_t den) {
        if (den == 0) throw config_error("rational with zero denominator");
        const std::uint64_t g = std::gcd(static_cast<std::uint64_t>(num < 0 ? -num : num), den);
        if (g > 1) {
            num /= static_cast<std::int64_t>(g);
            den /= g;
        }
        return {num, den};
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    bool operator==(const rational&) const = default;
};

// Exact distribution from exhaustive enumeration: integer assignment counts
// over a common denominator |support|^wires. Floating point appears only at
// the output boundary.
struct exact_pmf {
    std::map<std::int64_t, std::uint64_t> counts; // scaled value -> #assignments
    std::uint64_t total = 0;                      // |support|^wires
    std::uint64_t wires = 0;

    rational prob(std::int64_t v) const {
        auto it = counts.find(v);
        return rational::make(it == counts.end() ? 0 : static_cast<std::int64_t>(it->second),
                              total);
    }

    rational mean() const {
        __int128 sum = 0;
        for (const auto& [v, c] : counts) sum += static_cast<__int128>(c) * v;
        return rational::make(static_cast<std::int64_t>(sum), total);
    }

    // Sum of raw counts; equals `total` for a complete enumeration.
    std::uint64_t count_sum() const {
        std::uint64_t s = 0;
        for (const auto& [v, c] : counts) s += c;
        return s;
    }

    void merge(const exact_pmf& other) {
        for (const auto& [v, c] : other.counts) counts[v] += c;
    }
};

inline constexpr std::uint64_t default_enumeration_guard = 1ull << 30;

namespace detail {

// S^wires, or nullopt-equivalent overflow marker (0) past 2^63.
inline std::uint64_t assignment_count(std::uint64_t support, std::uint64_t wires) {
    std::uint64_t total = 1;
    for (std::uint64_t i = 0; i < wires; ++i) {
        if (total > (1ull << 63) / support) return 0;
        total *= support;
    }
    return total;
}

enum class enum_target { delay, skew };

// Enumerates assignment indices [first, last) as a mixed-radix counter over
// the wires in draw order, evaluating each assignment through the same
// recurrence code path the simulator uses. Partition results merge by count
// addition, independent of the split.
inline exact_pmf enumerate_range(const cone_spec& spec, const delay_model& model,
                                 enum_target target, std::uint64_t first, std::uint64_t last) {
    const std::uint64_t wires = spec.wire_count();
    const std::size_t S = model.support.size();

    std::vector<std::uint8_t> digits(wires, 0);
    std::vector<time_value> delays(wires, model.support.empty() ? 0 : model.support[0]);

    // Decode the starting index; digit i varies fastest for the first-drawn wire.
    std::uint64_t rem = first;
    for (std::uint64_t i = 0; i < wires && rem != 0; ++i) {
        digits[i] = static_cast<std::uint8_t>(rem % S);
        delays[i] = model.support[digits[i]];
        rem /= S;
    }

    exact_pmf out;
    out.wires = wires;
    cone_workspace ws;

    for (std::uint64_t a = first; a < last; ++a) {
        std::size_t i = 0;
        auto draw = [&delays, &i](std::int32_t, std::int32_t) { return delays[i++]; };
        const auto top = run_cone(spec, draw, ws);
        const std::int64_t value =
            target == enum_target::delay
                ? top[0]
                : static_cast<std::int64_t>(top[static_cast<std::size_t>(spec.span)]) - top[0];
        ++out.counts[value];

        for (std::uint64_t w = 0; w < wires; ++w) {
            if (++digits[w] < S) {
                delays[w] = model.support[digits[w]];
                break;
            }
            digits[w] = 0;
            delays[w] = model.support[0];
        }
    }
    return out;
}

inline exact_pmf enumerate_cone(const cone_spec& spec, const delay_model& model,
                                enum_target target, std::uint64_t guard, unsigned workers) {
    spec.validate();

    if (!model.stochastic()) {
        // Deterministic models are a point mass; evaluate once.
        rng_stream unused(xoshiro512ss::from_u64(0));
        const grid_sample s = simulate_sample(spec, model, unused);
        exact_pmf out;
        out.total = 1;
        out.wires = spec.wire_count();
        const std::int64_t value = target == enum_target::delay
                                       ? s.top[0]
                                       : static_cast<std::int64_t>(s.top.back()) - s.top[0];
        out.counts[value] = 1;
        return out;
    }

    const std::uint64_t wires = spec.wire_count();
    const std::uint64_t total = assignment_count(model.support.size(), wires);
    if (total == 0 || total > guard) {
        throw guard_error("enumeration of " + std::to_string(wires) + " wires exceeds the guard of " +
                          std::to_string(guard) +
                          " assignments; use Monte Carlo simulation instead or raise the guard");
    }

    if (workers <= 1 || total < 1024) {
        exact_pmf out = enumerate_range(spec, model, target, 0, total);
        out.total = total;
        return out;
    }

    std::vector<exact_pmf> parts(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        const std::uint64_t first = total / workers * t;
        const std::uint64_t last = (t + 1 == workers) ? total : total / workers * (t + 1);
        threads.emplace_back([&, t, first, last] {
            parts[t] = enumerate_range(spec, model, target, first, last);
        });
    }
    for (auto& th : threads) th.join();

    exact_pmf out;
    out.wires = wires;
    out.total = total;
    for (const auto& p : parts) out.merge(p);
    return out;
}

} // namespace detail

// Exact distribution of the top-node delay d(0, H), by exhausting all wire
// delay assignments of the dependency cone.
inline exact_pmf exact_delay_pmf(std::int32_t height, const delay_model& model,
                                 std::uint64_t guard = default_enumeration_guard,
                                 unsigned workers = 1) {
    return detail::enumerate_cone({height, 0}, model, detail::enum_target::delay, guard, workers);
}

// Exact distribution of the skew d(delta, H) - d(0, H) over the joint cone.
inline exact_pmf exact_skew_pmf(std::int32_t height, std::int32_t delta, const delay_model& model,
                                std::uint64_t guard = default_enumeration_guard,
                                unsigned workers = 1) {
    if (delta < 0) throw config_error("skew distance must be >= 0");
    if (delta == 0) {
        exact_pmf out;
        out.total = 1;
        out.wires = cone_spec{height, 0}.wire_count();
        out.counts[0] = 1;
        return out;
    }
    return detail::enumerate_cone({height, delta}, model, detail::enum_target::skew, guard,
                                  workers);
}

inline rational exact_mean(const exact_pmf& pmf) { return pmf.mean(); }

} // namespace trix
