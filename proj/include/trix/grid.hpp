#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "trix/errors.hpp"
#include "trix/model.hpp"
#include "trix/rng.hpp"

#if defined(__AVX2__) && defined(__BMI2__)
#include <immintrin.h>
#define TRIX_HAVE_AVX2_PATH 1
#endif

namespace trix {

// The dependency cone of the observed top nodes x in [0, span] at layer
// `height`: layer y covers x in [-(height-y), span + (height-y)], which is
// exactly the set of nodes able to influence the observation. Evaluating
// the cone reproduces the infinitely wide grid without approximation.
struct cone_spec {
    std::int32_t height = 0;
    std::int32_t span = 0;

    void validate() const {
        if (height < 0) throw config_error("cone height must be >= 0");
        if (span < 0) throw config_error("cone span must be >= 0");
    }

    std::int32_t layer_width(std::int32_t y) const { return span + 2 * (height - y) + 1; }
    std::int32_t base_width() const { return layer_width(0); }

    // Wires drawn per sample: 3 per node on layers 1..height.
    std::uint64_t wire_count() const {
        const std::uint64_t h = static_cast<std::uint64_t>(height);
        const std::uint64_t d = static_cast<std::uint64_t>(span);
        return 3 * (h * h + h * d);
    }

    // Median evaluations per sample.
    std::uint64_t node_updates() const {
        const std::uint64_t h = static_cast<std::uint64_t>(height);
        const std::uint64_t d = static_cast<std::uint64_t>(span);
        return h * h + h * d;
    }

    bool operator==(const cone_spec&) const = default;
};

// Second-largest of three.
constexpr time_value median3(time_value a, time_value b, time_value c) {
    const time_value lo = a < b ? a : b;
    const time_value hi = a < b ? b : a;
    return lo > (hi < c ? hi : c) ? lo : (hi < c ? hi : c);
}

// One realized sample of the cone. `top` holds the pulse times of the
// observed nodes x in [0, span] at the top layer. Diagnostic (recorded)
// samples additionally keep every layer and every drawn wire delay in draw
// order, which is what the complement transform consumes.
struct grid_sample {
    cone_spec spec;
    delay_model model;
    std::vector<time_value> top;

    bool recorded = false;
    std::vector<std::vector<time_value>> layers; // layer y, x ascending
    std::vector<time_value> delays;              // draw order

    rng_stream::origin_info origin;

    time_value delay() const { return top.at(0); }
};

// Reusable evaluation buffers so the Monte Carlo loop never allocates.
struct cone_workspace {
    std::vector<time_value> prev, next;
#if TRIX_HAVE_AVX2_PATH
    std::vector<std::int16_t> prev16, next16;
#endif
    std::vector<time_value> top;
};

// Evaluates the median recurrence over the cone. `draw(x, c)` must return
// the scaled delay of the wire from (x + c, y) into (x, y + 1) and is
// invoked in the fixed draw order: layer-major, x ascending, c = -1, 0, +1.
// Returns the top-layer times for x in [0, span], valid until the workspace
// is reused. If `record` is non-null, all layers are stored there.
template <class DrawFn>
std::span<const time_value> run_cone(const cone_spec& spec, DrawFn&& draw,
                                     cone_workspace& ws, grid_sample* record = nullptr) {
    spec.validate();
    const std::int32_t H = spec.height;

    ws.prev.assign(static_cast<std::size_t>(spec.base_width()), 0);
    ws.next.resize(static_cast<std::size_t>(spec.base_width()));
    if (record) {
        record->layers.clear();
        record->layers.emplace_back(ws.prev.begin(), ws.prev.end());
    }

    for (std::int32_t y = 1; y <= H; ++y) {
        const std::int32_t w = spec.layer_width(y);
        const std::int32_t x_lo = -(H - y);
        const time_value* p = ws.prev.data();
        time_value* nx = ws.next.data();
        for (std::int32_t j = 0; j < w; ++j) {
            const std::int32_t x = x_lo + j;
            const time_value a = p[j] + draw(x, -1);
            const time_value b = p[j + 1] + draw(x, 0);
            const time_value c = p[j + 2] + draw(x, +1);
            nx[j] = median3(a, b, c);
        }
        std::swap(ws.prev, ws.next);
        if (record) {
            record->layers.emplace_back(ws.prev.begin(), ws.prev.begin() + w);
        }
    }

    return {ws.prev.data(), static_cast<std::size_t>(spec.span) + 1};
}

#if TRIX_HAVE_AVX2_PATH
namespace detail {

// Binary-model fast path. Consumes exactly the same stream bits in the same
// order as run_cone with a next_bit() sampler and produces identical times;
// the wire bits of 16 consecutive nodes are split into the three in-neighbor
// lanes with PEXT and the medians evaluated on 16-bit SIMD lanes.
inline std::span<const time_value> run_cone_binary_avx2(const cone_spec& spec,
                                                        rng_stream& stream,
                                                        cone_workspace& ws) {
    const std::int32_t H = spec.height;
    ws.prev16.assign(static_cast<std::size_t>(spec.base_width()) + 16, 0);
    ws.next16.assign(static_cast<std::size_t>(spec.base_width()) + 16, 0);

    const __m256i lane_bits = _mm256_setr_epi16(
        1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384,
        static_cast<short>(-32768));
    const __m256i ones16 = _mm256_set1_epi16(1);
    constexpr std::uint64_t every3 = 0x0000249249249249ull; // bits 0,3,...,45

    for (std::int32_t y = 1; y <= H; ++y) {
        const std::int32_t w = spec.layer_width(y);
        const std::int16_t* p = ws.prev16.data();
        std::int16_t* nx = ws.next16.data();

        std::int32_t j = 0;
        for (; j + 16 <= w; j += 16) {
            const std::uint64_t chunk = stream.next_bits(48);
            const std::uint64_t bm1 = _pext_u64(chunk, every3);
            const std::uint64_t b0 = _pext_u64(chunk, every3 << 1);
            const std::uint64_t bp1 = _pext_u64(chunk, every3 << 2);

            auto expand = [&](std::uint64_t bits16) {
                const __m256i v = _mm256_set1_epi16(static_cast<short>(bits16));
                const __m256i hit = _mm256_cmpeq_epi16(_mm256_and_si256(v, lane_bits), lane_bits);
                return _mm256_and_si256(hit, ones16);
            };

            __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + j));
            __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + j + 1));
            __m256i c = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + j + 2));
            a = _mm256_add_epi16(a, expand(bm1));
            b = _mm256_add_epi16(b, expand(b0));
            c = _mm256_add_epi16(c, expand(bp1));

            const __m256i lo = _mm256_min_epi16(a, b);
            const __m256i hi = _mm256_max_epi16(a, b);
            const __m256i med = _mm256_max_epi16(lo, _mm256_min_epi16(hi, c));
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(nx + j), med);
        }
        for (; j < w; ++j) {
            const std::int16_t a = static_cast<std::int16_t>(p[j] + stream.next_bit());
            const std::int16_t b = static_cast<std::int16_t>(p[j + 1] + stream.next_bit());
            const std::int16_t c = static_cast<std::int16_t>(p[j + 2] + stream.next_bit());
            const std::int16_t lo = a < b ? a : b;
            const std::int16_t hi = a < b ? b : a;
            nx[j] = lo > (hi < c ? hi : c) ? lo : (hi < c ? hi : c);
        }
        std::swap(ws.prev16, ws.next16);
    }

    ws.top.resize(static_cast<std::size_t>(spec.span) + 1);
    for (std::int32_t x = 0; x <= spec.span; ++x) ws.top[static_cast<std::size_t>(x)] = ws.prev16[static_cast<std::size_t>(x)];
    return {ws.top.data(), ws.top.size()};
}

} // namespace detail
#endif // TRIX_HAVE_AVX2_PATH

// Binary-model cone evaluation, dispatched to the SIMD path when compiled in
// and applicable. Bit-identical to the generic path on the same stream.
inline std::span<const time_value> run_cone_binary(const cone_spec& spec, rng_stream& stream,
                                                   cone_workspace& ws) {
    spec.validate();
#if TRIX_HAVE_AVX2_PATH
    if (spec.height <= std::numeric_limits<std::int16_t>::max()) {
        return detail::run_cone_binary_avx2(spec, stream, ws);
    }
#endif
    return run_cone(
        spec, [&stream](std::int32_t, std::int32_t) { return static_cast<time_value>(stream.next_bit()); },
        ws);
}

namespace detail {

template <class DrawFn>
grid_sample finish_sample(const cone_spec& spec, const delay_model& model, DrawFn&& draw,
                          bool record, rng_stream::origin_info origin) {
    grid_sample out;
    out.spec = spec;
    out.model = model;
    out.origin = origin;
    out.recorded = record;

    cone_workspace ws;
    std::span<const time_value> top;
    if (record) {
        auto recording = [&](std::int32_t x, std::int32_t c) {
            const time_value w = draw(x, c);
            out.delays.push_back(w);
            return w;
        };
        top = run_cone(spec, recording, ws, &out);
    } else {
        top = run_cone(spec, draw, ws);
    }
    out.top.assign(top.begin(), top.end());
    return out;
}

} // namespace detail

// Simulates one sample. Layer 0 pulses at time 0; every higher node fires at
// the median arrival time of its three in-neighbors. Stochastic models draw
// one delay per wire from the stream in the fixed draw order; deterministic
// models never touch the stream.
inline grid_sample simulate_sample(const cone_spec& spec, const delay_model& model,
                                   rng_stream& stream, bool record = false) {
    spec.validate();
    const std::uint64_t max_time =
        static_cast<std::uint64_t>(spec.height) * static_cast<std::uint64_t>(model.max_delay());
    if (max_time > static_cast<std::uint64_t>(std::numeric_limits<time_value>::max())) {
        throw config_error("cone height times maximum delay overflows the time type");
    }

    switch (model.kind) {
        case delay_kind::binary_fair_coin:
            return detail::finish_sample(
                spec, model,
                [&stream](std::int32_t, std::int32_t) { return static_cast<time_value>(stream.next_bit()); },
                record, stream.origin());
        case delay_kind::ternary_uniform:
            return detail::finish_sample(
                spec, model,
                [&stream, &model](std::int32_t, std::int32_t) { return next_delay(stream, model); },
                record, stream.origin());
        case delay_kind::deterministic_split: {
            const std::int32_t boundary = model.split_boundary;
            const time_value slow = model.max_delay();
            return detail::finish_sample(
                spec, model,
                [boundary, slow](std::int32_t x, std::int32_t) {
                    return x >= boundary ? slow : static_cast<time_value>(0);
                },
                record, {});
        }
        case delay_kind::deterministic_constant: {
            const time_value w = model.constant_delay;
            return detail::finish_sample(
                spec, model, [w](std::int32_t, std::int32_t) { return w; }, record, {});
        }
        case delay_kind::explicit_table: {
            if (!model.table || model.table->size() != spec.wire_count()) {
                throw config_error("explicit delay table does not match the cone's wire count");
            }
            const std::vector<time_value>& t = *model.table;
            std::size_t i = 0;
            return detail::finish_sample(
                spec, model, [&t, &i](std::int32_t, std::int32_t) { return t[i++]; }, record, {});
        }
    }
    throw config_error("unhandled delay model kind");
}

// Signed skew between observed top nodes: time at x = delta minus time at
// x = 0, in scaled units.
inline time_value extract_skew(const grid_sample& s, std::int32_t delta) {
    if (delta < 0 || delta > s.spec.span) {
        throw config_error("skew distance lies outside the simulated cone");
    }
    return s.top[static_cast<std::size_t>(delta)] - s.top[0];
}

// Re-evaluates a recorded sample with every wire delay w replaced by 1 - w.
// Requires binary-valued recorded delays (resolution 1, delays in {0, 1}).
// The rebuilt sample satisfies time'(x, y) = y - time(x, y) at every node;
// violation of that identity is reported as an internal inconsistency.
inline grid_sample complement_sample(const grid_sample& s) {
    if (!s.recorded) {
        throw config_error("complement requires a sample recorded in diagnostic mode");
    }
    if (s.model.resolution != 1 || s.model.max_delay() > 1) {
        throw config_error("complement is defined for binary-valued delay assignments only");
    }
    std::vector<time_value> flipped(s.delays.size());
    for (std::size_t i = 0; i < s.delays.size(); ++i) {
        if (s.delays[i] != 0 && s.delays[i] != 1) {
            throw config_error("complement is defined for binary-valued delay assignments only");
        }
        flipped[i] = static_cast<time_value>(1 - s.delays[i]);
    }

    rng_stream unused(xoshiro512ss::from_u64(0));
    grid_sample out = simulate_sample(s.spec, delay_model::from_table(std::move(flipped), 1),
                                      unused, true);

    for (std::size_t y = 0; y < out.layers.size(); ++y) {
        for (std::size_t i = 0; i < out.layers[y].size(); ++i) {
            if (out.layers[y][i] != static_cast<time_value>(y) - s.layers[y][i]) {
                throw inconsistency_error("complemented node time differs from y - t");
            }
        }
    }
    return out;
}

} // namespace trix
