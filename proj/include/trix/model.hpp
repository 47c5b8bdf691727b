#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "trix/errors.hpp"
#include "trix/rng.hpp"

namespace trix {

// Node pulse times and wire delays in scaled integer time units. The
// physical time is value / resolution, with the resolution declared by the
// delay model. Scaling keeps histogram bucketing exact; the ternary model's
// half-unit steps become integers at resolution 2.
using time_value = std::int32_t;

enum class delay_kind {
    binary_fair_coin,      // delay 0 or 1, probability 1/2 each
    ternary_uniform,       // delay 0, 1 or 2 scaled (0, 0.5, 1 physical), uniform
    deterministic_split,   // wires into x >= boundary slow, into x < boundary fast
    deterministic_constant,
    explicit_table,        // one fixed delay per wire, in draw order
};

struct delay_model {
    delay_kind kind = delay_kind::binary_fair_coin;
    std::int32_t resolution = 1;       // scaled ticks per physical time unit
    std::vector<time_value> support;   // scaled delays the model can emit, ascending
    std::int32_t split_boundary = 1;   // deterministic_split only
    time_value constant_delay = 0;     // deterministic_constant only
    std::shared_ptr<const std::vector<time_value>> table; // explicit_table only

    static delay_model binary() {
        return {delay_kind::binary_fair_coin, 1, {0, 1}, 1, 0, nullptr};
    }

    static delay_model ternary() {
        return {delay_kind::ternary_uniform, 2, {0, 1, 2}, 1, 0, nullptr};
    }

    static delay_model split(std::int32_t boundary = 1) {
        return {delay_kind::deterministic_split, 1, {0, 1}, boundary, 0, nullptr};
    }

    static delay_model constant(time_value w) {
        if (w < 0) throw config_error("constant delay must be non-negative");
        return {delay_kind::deterministic_constant, 1, {w}, 1, w, nullptr};
    }

    // Delays listed in draw order; the cone being evaluated must need
    // exactly table.size() wires.
    static delay_model from_table(std::vector<time_value> delays, std::int32_t resolution = 1) {
        delay_model m;
        m.kind = delay_kind::explicit_table;
        m.resolution = resolution;
        auto shared = std::make_shared<std::vector<time_value>>(std::move(delays));
        for (time_value w : *shared) {
            if (w < 0) throw config_error("table delays must be non-negative");
        }
        std::vector<time_value> sup(*shared);
        std::sort(sup.begin(), sup.end());
        sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
        if (sup.empty()) sup.push_back(0);
        m.support = std::move(sup);
        m.table = std::move(shared);
        return m;
    }

    bool stochastic() const {
        return kind == delay_kind::binary_fair_coin || kind == delay_kind::ternary_uniform;
    }

    // Largest scaled delay the model can assign to a wire.
    time_value max_delay() const { return support.empty() ? 0 : support.back(); }

    std::string name() const {
        switch (kind) {
            case delay_kind::binary_fair_coin: return "binary";
            case delay_kind::ternary_uniform: return "ternary";
            case delay_kind::deterministic_split: return "split:" + std::to_string(split_boundary);
            case delay_kind::deterministic_constant: return "const:" + std::to_string(constant_delay);
            case delay_kind::explicit_table: return "table";
        }
        return "?";
    }

    // Accepts binary | ternary | split[:x*] | const:<w>.
    static delay_model parse(const std::string& s) {
        if (s == "binary") return binary();
        if (s == "ternary") return ternary();
        if (s == "split") return split();
        if (s.rfind("split:", 0) == 0) {
            try {
                return split(std::stoi(s.substr(6)));
            } catch (const std::exception&) {
                throw config_error("bad split boundary in model spec: " + s);
            }
        }
        if (s.rfind("const:", 0) == 0) {
            try {
                return constant(std::stoi(s.substr(6)));
            } catch (const config_error&) {
                throw;
            } catch (const std::exception&) {
                throw config_error("bad constant delay in model spec: " + s);
            }
        }
        throw config_error("unknown delay model: " + s);
    }
};

// Converts a scaled time statistic back to physical units.
inline double to_physical(double scaled, const delay_model& m) {
    return scaled / static_cast<double>(m.resolution);
}

// Draws one scaled wire delay. Stochastic models only; a deterministic
// model never touches the stream.
inline time_value next_delay(rng_stream& stream, const delay_model& model) {
    switch (model.kind) {
        case delay_kind::binary_fair_coin:
            return static_cast<time_value>(stream.next_bit());
        case delay_kind::ternary_uniform:
            // Rejection on 2-bit draws keeps the three values exactly uniform.
            for (;;) {
                const std::uint32_t b = stream.next_two_bits();
                if (b < 3) return static_cast<time_value>(b);
            }
        default:
            throw config_error("next_delay requires a stochastic delay model");
    }
}

} // namespace trix
