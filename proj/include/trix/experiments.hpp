#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "trix/enumerate.hpp"
#include "trix/errors.hpp"
#include "trix/grid.hpp"
#include "trix/histogram.hpp"
#include "trix/io.hpp"
#include "trix/model.hpp"
#include "trix/rng.hpp"
#include "trix/stats.hpp"
#include "trix/version.hpp"

namespace trix {

enum class scenario {
    delay_pmf,
    skew_pmf,
    delay_sweep,
    skew_sweep,
    delta_sweep,
    cross_validate,
    oracle_check,
};

inline std::string to_string(scenario s) {
    switch (s) {
        case scenario::delay_pmf: return "delay-pmf";
        case scenario::skew_pmf: return "skew-pmf";
        case scenario::delay_sweep: return "delay-sweep";
        case scenario::skew_sweep: return "skew-sweep";
        case scenario::delta_sweep: return "delta-sweep";
        case scenario::cross_validate: return "cross-validate";
        case scenario::oracle_check: return "oracle-check";
    }
    return "?";
}

inline scenario parse_scenario(const std::string& s) {
    if (s == "delay-pmf") return scenario::delay_pmf;
    if (s == "skew-pmf") return scenario::skew_pmf;
    if (s == "delay-sweep") return scenario::delay_sweep;
    if (s == "skew-sweep") return scenario::skew_sweep;
    if (s == "delta-sweep") return scenario::delta_sweep;
    if (s == "cross-validate") return scenario::cross_validate;
    if (s == "oracle-check") return scenario::oracle_check;
    throw config_error("unknown scenario: " + s);
}

inline constexpr std::uint64_t default_node_update_ceiling = 1'000'000'000'000ull;

struct experiment_config {
    scenario scen = scenario::delay_pmf;
    std::vector<std::int32_t> heights{20};
    std::vector<std::int32_t> deltas{1};
    std::uint64_t samples = 1'000'000;
    delay_model model = delay_model::binary();
    rng_algorithm rng = rng_algorithm::xoshiro512starstar;
    std::uint64_t master_seed = 1;
    double alpha = 0.01;
    double lambda_min = 2.0; // tail decay floor for stddev error bars
    unsigned workers = 0;    // 0: hardware concurrency
    bool force = false;
    bool record_grid = false;
    std::uint64_t node_update_ceiling = default_node_update_ceiling;
    std::string out_dir;

    unsigned effective_workers() const {
        if (workers != 0) return workers;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : hw;
    }

    void validate() const {
        if (samples < 1) throw config_error("sample count must be >= 1");
        if (heights.empty()) throw config_error("at least one height is required");
        for (auto h : heights) {
            if (h < 0) throw config_error("heights must be >= 0");
        }
        if (!std::is_sorted(heights.begin(), heights.end()) ||
            std::adjacent_find(heights.begin(), heights.end()) != heights.end()) {
            if (heights.size() > 1) throw config_error("height list must be strictly increasing");
        }
        if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must lie in (0, 1)");
        if (!(lambda_min > 0.0)) throw config_error("lambda-min must be positive");
        for (auto d : deltas) {
            if (d < 0) throw config_error("deltas must be >= 0");
            for (auto h : heights) {
                if (d > 2 * h) throw config_error("delta exceeds 2H, nodes are independent there");
            }
        }
        if (!std::is_sorted(deltas.begin(), deltas.end()) ||
            std::adjacent_find(deltas.begin(), deltas.end()) != deltas.end()) {
            if (deltas.size() > 1) throw config_error("delta list must be strictly increasing");
        }
    }

    std::int32_t first_delta(std::int32_t fallback) const {
        return deltas.empty() ? fallback : deltas.front();
    }

    // Median evaluations the job will perform, for the resource guard.
    std::uint64_t estimated_node_updates() const {
        std::uint64_t total = 0;
        auto one = [&](std::int32_t h, std::int32_t d) {
            total += samples * cone_spec{h, d}.node_updates();
        };
        switch (scen) {
            case scenario::delay_pmf:
            case scenario::delay_sweep:
                for (auto h : heights) one(h, 0);
                break;
            case scenario::oracle_check:
                for (auto h : heights) one(h, first_delta(0));
                break;
            case scenario::skew_pmf:
            case scenario::skew_sweep:
                for (auto h : heights) one(h, first_delta(1));
                break;
            case scenario::delta_sweep:
                for (auto d : deltas) one(heights.front(), d);
                break;
            case scenario::cross_validate:
                for (auto h : heights) one(h, first_delta(1));
                total *= 3; // rng pair plus the alternate model run
                break;
        }
        return total;
    }

    json to_json() const {
        json j;
        j["scenario"] = to_string(scen);
        j["heights"] = heights;
        j["deltas"] = deltas;
        j["samples"] = samples;
        j["model"] = model.name();
        j["rng"] = trix::to_string(rng);
        j["seed"] = master_seed;
        j["alpha"] = alpha;
        j["lambda_min"] = lambda_min;
        j["workers"] = workers;
        j["force"] = force;
        j["record_grid"] = record_grid;
        j["node_update_ceiling"] = node_update_ceiling;
        j["out_dir"] = out_dir;
        return j;
    }

    static experiment_config from_json(const json& j) {
        experiment_config c;
        if (j.contains("scenario")) c.scen = parse_scenario(j.at("scenario").get<std::string>());
        if (j.contains("heights")) c.heights = j.at("heights").get<std::vector<std::int32_t>>();
        if (j.contains("height")) c.heights = {j.at("height").get<std::int32_t>()};
        if (j.contains("deltas")) c.deltas = j.at("deltas").get<std::vector<std::int32_t>>();
        if (j.contains("delta")) c.deltas = {j.at("delta").get<std::int32_t>()};
        if (j.contains("samples")) c.samples = j.at("samples").get<std::uint64_t>();
        if (j.contains("model")) c.model = delay_model::parse(j.at("model").get<std::string>());
        if (j.contains("rng")) c.rng = parse_rng_algorithm(j.at("rng").get<std::string>());
        if (j.contains("seed")) c.master_seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
        if (j.contains("lambda_min")) c.lambda_min = j.at("lambda_min").get<double>();
        if (j.contains("workers")) c.workers = j.at("workers").get<unsigned>();
        if (j.contains("force")) c.force = j.at("force").get<bool>();
        if (j.contains("record_grid")) c.record_grid = j.at("record_grid").get<bool>();
        if (j.contains("node_update_ceiling")) {
            c.node_update_ceiling = j.at("node_update_ceiling").get<std::uint64_t>();
        }
        if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
        return c;
    }

    std::string hash() const { return fnv1a_hex(to_json().dump()); }
};

namespace detail {

// Evaluates one sample's top layer for any model, sharing the recurrence
// code path. The binary model takes the SIMD-dispatched route.
inline std::span<const time_value> evaluate_top(const cone_spec& spec, const delay_model& model,
                                                rng_stream& stream, cone_workspace& ws) {
    switch (model.kind) {
        case delay_kind::binary_fair_coin:
            return run_cone_binary(spec, stream, ws);
        case delay_kind::ternary_uniform:
            return run_cone(
                spec,
                [&stream, &model](std::int32_t, std::int32_t) { return next_delay(stream, model); },
                ws);
        case delay_kind::deterministic_split: {
            const std::int32_t boundary = model.split_boundary;
            const time_value slow = model.max_delay();
            return run_cone(
                spec,
                [boundary, slow](std::int32_t x, std::int32_t) {
                    return x >= boundary ? slow : static_cast<time_value>(0);
                },
                ws);
        }
        case delay_kind::deterministic_constant: {
            const time_value w = model.constant_delay;
            return run_cone(
                spec, [w](std::int32_t, std::int32_t) { return w; }, ws);
        }
        case delay_kind::explicit_table: {
            if (!model.table || model.table->size() != spec.wire_count()) {
                throw config_error("explicit delay table does not match the cone's wire count");
            }
            const std::vector<time_value>& t = *model.table;
            std::size_t i = 0;
            return run_cone(
                spec, [&t, &i](std::int32_t, std::int32_t) { return t[i++]; }, ws);
        }
    }
    throw config_error("unhandled delay model kind");
}

struct batch_result {
    histogram delay_hist;
    histogram skew_hist;
};

// Fans samples [0, n) out over workers in contiguous index ranges. Every
// sample owns a stream derived from (master_seed, sample_index), so the
// merged histograms are independent of the worker count.
inline batch_result run_batch(const cone_spec& spec, const delay_model& model,
                              rng_algorithm alg, std::uint64_t master_seed, std::uint64_t n,
                              unsigned workers, bool want_delay, bool want_skew) {
    spec.validate();
    const std::int64_t max_time =
        static_cast<std::int64_t>(spec.height) * static_cast<std::int64_t>(model.max_delay());

    const unsigned W = std::max(1u, workers);
    std::vector<std::vector<std::uint64_t>> delay_parts(W);
    std::vector<std::vector<std::uint64_t>> skew_parts(W);

    auto work = [&](unsigned t, std::uint64_t first, std::uint64_t last) {
        cone_workspace ws;
        auto& dcounts = delay_parts[t];
        auto& scounts = skew_parts[t];
        if (want_delay) dcounts.assign(static_cast<std::size_t>(max_time) + 1, 0);
        if (want_skew) scounts.assign(static_cast<std::size_t>(2 * max_time) + 1, 0);
        const std::int32_t span = spec.span;
        for (std::uint64_t idx = first; idx < last; ++idx) {
            rng_stream stream = derive_stream(master_seed, idx, alg);
            const auto top = evaluate_top(spec, model, stream, ws);
            if (want_delay) ++dcounts[static_cast<std::size_t>(top[0])];
            if (want_skew) {
                const std::int64_t s =
                    static_cast<std::int64_t>(top[static_cast<std::size_t>(span)]) - top[0];
                ++scounts[static_cast<std::size_t>(s + max_time)];
            }
        }
    };

    if (W == 1) {
        work(0, 0, n);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(W);
        for (unsigned t = 0; t < W; ++t) {
            const std::uint64_t first = n / W * t;
            const std::uint64_t last = (t + 1 == W) ? n : n / W * (t + 1);
            threads.emplace_back(work, t, first, last);
        }
        for (auto& th : threads) th.join();
    }

    batch_result out;
    if (want_delay) {
        std::vector<std::uint64_t> merged(static_cast<std::size_t>(max_time) + 1, 0);
        for (const auto& part : delay_parts) {
            for (std::size_t i = 0; i < part.size(); ++i) merged[i] += part[i];
        }
        out.delay_hist = histogram::from_counts(0, std::move(merged));
    }
    if (want_skew) {
        std::vector<std::uint64_t> merged(static_cast<std::size_t>(2 * max_time) + 1, 0);
        for (const auto& part : skew_parts) {
            for (std::size_t i = 0; i < part.size(); ++i) merged[i] += part[i];
        }
        out.skew_hist = histogram::from_counts(-max_time, std::move(merged));
    }
    return out;
}

} // namespace detail

struct distribution_result {
    std::int32_t height = 0;
    std::int32_t delta = 0;
    std::uint64_t n = 0;
    histogram hist; // scaled units
    confidence_band band;
    double mean_scaled = 0.0, stddev_scaled = 0.0;
    double mean_phys = 0.0, stddev_phys = 0.0;
    stddev_interval_result stddev_iv;
    std::optional<tail_fit> tail;
    std::vector<std::pair<double, double>> qq;

    // oracle-check extras
    std::optional<double> oracle_dkw_distance;
    std::optional<bool> oracle_within_dkw;
    std::optional<bool> oracle_within_band;
    exact_pmf oracle;
};

struct sweep_result_data {
    std::vector<sweep_row> rows; // physical units
    power_fit primary;
    std::optional<power_fit> secondary;
};

enum class verdict { pass, fail, inconclusive };

inline const char* to_string(verdict v) {
    switch (v) {
        case verdict::pass: return "pass";
        case verdict::fail: return "fail";
        case verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct cross_validation_result {
    verdict rng_delay = verdict::inconclusive;
    verdict rng_skew = verdict::inconclusive;
    verdict model_delay = verdict::inconclusive;
    verdict model_skew = verdict::inconclusive;
    double rng_delay_distance = 0.0, rng_skew_distance = 0.0;
    double model_delay_distance = 0.0, model_skew_distance = 0.0;
    double sigma_delay_binary = 0.0, sigma_delay_ternary = 0.0; // physical units
    double sigma_skew_binary = 0.0, sigma_skew_ternary = 0.0;
    double dkw_eps_sum = 0.0;
};

struct experiment_report {
    experiment_config config;
    std::string config_hash;
    std::string version = version_string;
    std::string draw_order = draw_order_tag;
    std::vector<distribution_result> distributions;
    std::optional<sweep_result_data> sweep;
    std::optional<cross_validation_result> cross;
    json recorded_grid; // present only with record_grid
    double wall_seconds = 0.0;
    double samples_per_second = 0.0;
};

namespace detail {

inline void enforce_resource_guard(const experiment_config& cfg) {
    const std::uint64_t est = cfg.estimated_node_updates();
    if (!cfg.force && est > cfg.node_update_ceiling) {
        throw guard_error("job needs about " + std::to_string(est) +
                          " node updates, above the ceiling of " +
                          std::to_string(cfg.node_update_ceiling) +
                          "; rerun with force to override (expect minutes to hours)");
    }
}

// 5-sigma sanity pins on stochastic runs: delay mean at H/2, skew mean at 0.
inline void check_mean_pins(const distribution_result& r, const delay_model& model,
                            bool is_skew) {
    if (!model.stochastic() || r.n < 1000 || r.stddev_scaled == 0.0) return;
    const double tol = 5.0 * r.stddev_scaled / std::sqrt(static_cast<double>(r.n));
    const double expect =
        is_skew ? 0.0
                : 0.5 * static_cast<double>(r.height) * static_cast<double>(model.max_delay());
    if (std::abs(r.mean_scaled - expect) > tol) {
        throw inconsistency_error("sample mean " + std::to_string(r.mean_scaled) +
                                  " strays more than 5 sigma from " + std::to_string(expect));
    }
}

inline distribution_result analyze_distribution(const experiment_config& cfg, std::int32_t h,
                                                std::int32_t d, histogram hist, bool is_skew) {
    distribution_result r;
    r.height = h;
    r.delta = d;
    r.n = hist.n;
    r.hist = std::move(hist);
    r.mean_scaled = r.hist.mean();
    r.stddev_scaled = r.hist.n >= 2 ? r.hist.stddev() : 0.0;
    r.mean_phys = to_physical(r.mean_scaled, cfg.model);
    r.stddev_phys = to_physical(r.stddev_scaled, cfg.model);
    r.band = compute_confidence_band(r.hist, cfg.alpha);
    if (r.hist.n >= 2 && r.stddev_scaled > 0.0) {
        r.stddev_iv = stddev_interval(r.hist, r.band, cfg.lambda_min);
    } else {
        r.stddev_iv.point = r.stddev_scaled;
    }

    if (is_skew) {
        // Fit over |k| in [1, R], the widest R <= 4 with nonzero counts on
        // both sides; skipped when fewer than two such points exist.
        std::int64_t R = 0;
        for (std::int64_t m = 1; m <= 4; ++m) {
            if (r.hist.count_at(m) != 0 && r.hist.count_at(-m) != 0) {
                R = m;
            } else {
                break;
            }
        }
        if (R >= 2) r.tail = fit_exponential_tail(r.hist, 1, R, tail_side::pooled);
    } else if (r.stddev_scaled > 0.0) {
        const double mu =
            0.5 * static_cast<double>(h) * static_cast<double>(cfg.model.max_delay());
        r.qq = ecdf_and_qq(r.hist, mu, r.stddev_scaled);
    }

    check_mean_pins(r, cfg.model, is_skew);
    return r;
}

inline json distribution_to_json(const distribution_result& r, const experiment_config& cfg) {
    json j;
    j["height"] = r.height;
    j["delta"] = r.delta;
    j["n"] = r.n;
    j["resolution"] = cfg.model.resolution;
    j["mean_scaled"] = r.mean_scaled;
    j["stddev_scaled"] = r.stddev_scaled;
    j["mean"] = r.mean_phys;
    j["stddev"] = r.stddev_phys;
    j["stddev_interval_scaled"] = json::array({r.stddev_iv.lo, r.stddev_iv.hi});
    j["stddev_bootstrap_scaled"] =
        json::array({r.stddev_iv.bootstrap_lo, r.stddev_iv.bootstrap_hi});
    j["band"] = {{"alpha", r.band.alpha},
                 {"alpha_prime", r.band.alpha_prime},
                 {"buckets", r.band.buckets},
                 {"pooled_pmax", r.band.pooled_pmax},
                 {"dkw_eps", r.band.dkw_eps}};
    if (r.tail) {
        j["tail_fit"] = {{"lambda", r.tail->lambda},
                         {"k_lo", r.tail->k_lo},
                         {"k_hi", r.tail->k_hi},
                         {"side", to_string(r.tail->side)},
                         {"residual_norm", r.tail->residual_norm}};
    }
    if (r.oracle_dkw_distance) {
        j["oracle"] = {{"dkw_distance", *r.oracle_dkw_distance},
                       {"within_dkw", *r.oracle_within_dkw},
                       {"within_band", *r.oracle_within_band},
                       {"pmf", exact_pmf_to_json(r.oracle)}};
    }
    return j;
}

} // namespace detail

// Estimates the distribution of d(0,H) or s^delta(0,H) from n independent
// samples with per-sample derived streams.
inline experiment_report run_distribution(const experiment_config& cfg) {
    cfg.validate();
    if (cfg.scen != scenario::delay_pmf && cfg.scen != scenario::skew_pmf &&
        cfg.scen != scenario::oracle_check) {
        throw config_error("run_distribution handles delay-pmf, skew-pmf and oracle-check");
    }
    detail::enforce_resource_guard(cfg);

    const auto t0 = std::chrono::steady_clock::now();
    experiment_report rep;
    rep.config = cfg;
    rep.config_hash = cfg.hash();

    const std::int32_t h = cfg.heights.front();
    // The observable is the skew for skew-pmf and for oracle-check with a
    // positive delta; otherwise the top-node delay.
    const std::int32_t d = cfg.scen == scenario::skew_pmf     ? cfg.first_delta(1)
                           : cfg.scen == scenario::oracle_check ? cfg.first_delta(0)
                                                                : 0;
    if (cfg.scen == scenario::skew_pmf && d < 1) {
        throw config_error("skew-pmf requires delta >= 1");
    }
    const bool is_skew = d > 0;
    const cone_spec spec{h, is_skew ? d : 0};

    auto batch = detail::run_batch(spec, cfg.model, cfg.rng, cfg.master_seed, cfg.samples,
                                   cfg.effective_workers(), !is_skew, is_skew);
    distribution_result r = detail::analyze_distribution(
        cfg, h, spec.span, is_skew ? std::move(batch.skew_hist) : std::move(batch.delay_hist),
        is_skew);

    if (cfg.scen == scenario::oracle_check) {
        r.oracle = is_skew ? exact_skew_pmf(h, d, cfg.model) : exact_delay_pmf(h, cfg.model);
        r.oracle_dkw_distance = cdf_sup_distance(r.hist, r.oracle);
        r.oracle_within_dkw = *r.oracle_dkw_distance <= r.band.dkw_eps;
        r.oracle_within_band = pmf_within_band(r.oracle, r.band, r.hist);
    }

    rep.distributions.push_back(std::move(r));

    if (cfg.record_grid) {
        const cone_spec rec_spec{h, spec.span};
        if ((static_cast<std::uint64_t>(rec_spec.base_width()) + 1) *
                (static_cast<std::uint64_t>(h) + 1) >
            100'000'000ull) {
            throw config_error("recorded grid would be too large; lower the height");
        }
        rng_stream stream = derive_stream(cfg.master_seed, 0, cfg.rng);
        const grid_sample s = simulate_sample(rec_spec, cfg.model, stream, true);
        json layers = json::array();
        for (const auto& layer : s.layers) layers.push_back(layer);
        rep.recorded_grid = {{"sample_index", 0},
                             {"layers", std::move(layers)},
                             {"delays", s.delays}};
    }

    const auto t1 = std::chrono::steady_clock::now();
    rep.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    rep.samples_per_second =
        rep.wall_seconds > 0.0 ? static_cast<double>(cfg.samples) / rep.wall_seconds : 0.0;
    return rep;
}

// Per-point distribution runs over H (or delta), with fitted growth
// exponents: delay sweeps fit the log-log slope, skew sweeps the log-lin
// and loglog-lin slopes, delta sweeps the early-region log-log slope over
// delta <= H/20.
inline experiment_report run_sweep(const experiment_config& cfg) {
    cfg.validate();
    if (cfg.scen != scenario::delay_sweep && cfg.scen != scenario::skew_sweep &&
        cfg.scen != scenario::delta_sweep) {
        throw config_error("run_sweep handles delay-sweep, skew-sweep and delta-sweep");
    }
    detail::enforce_resource_guard(cfg);

    const auto t0 = std::chrono::steady_clock::now();
    experiment_report rep;
    rep.config = cfg;
    rep.config_hash = cfg.hash();

    const bool is_delta = cfg.scen == scenario::delta_sweep;
    const bool is_skew = cfg.scen != scenario::delay_sweep;

    std::vector<std::pair<std::int32_t, std::int32_t>> points; // (H, delta)
    if (is_delta) {
        for (auto d : cfg.deltas) points.emplace_back(cfg.heights.front(), d);
    } else {
        for (auto h : cfg.heights) {
            points.emplace_back(h, is_skew ? (cfg.deltas.empty() ? 1 : cfg.deltas.front()) : 0);
        }
    }

    sweep_result_data sweep;
    std::uint64_t total_samples = 0;
    for (const auto& [h, d] : points) {
        const cone_spec spec{h, d};
        auto batch = detail::run_batch(spec, cfg.model, cfg.rng, cfg.master_seed, cfg.samples,
                                       cfg.effective_workers(), !is_skew, is_skew);
        distribution_result r = detail::analyze_distribution(
            cfg, h, d, is_skew ? std::move(batch.skew_hist) : std::move(batch.delay_hist),
            is_skew);
        total_samples += cfg.samples;

        sweep_row row;
        row.axis = is_delta ? static_cast<double>(d) : static_cast<double>(h);
        row.n = r.n;
        row.mean = r.mean_phys;
        row.stddev = r.stddev_phys;
        row.stddev_lo = to_physical(r.stddev_iv.lo, cfg.model);
        row.stddev_hi = to_physical(r.stddev_iv.hi, cfg.model);
        sweep.rows.push_back(row);
        rep.distributions.push_back(std::move(r));
    }

    std::vector<double> axis, sigma;
    for (const auto& row : sweep.rows) {
        axis.push_back(row.axis);
        sigma.push_back(row.stddev);
    }
    if (is_delta) {
        // Early region: delta <= H/20, at least three points.
        const double cutoff = static_cast<double>(cfg.heights.front()) / 20.0;
        std::vector<double> ax, sg;
        for (std::size_t i = 0; i < axis.size(); ++i) {
            if (axis[i] <= cutoff) {
                ax.push_back(axis[i]);
                sg.push_back(sigma[i]);
            }
        }
        if (ax.size() < 3) {
            ax = axis;
            sg = sigma;
        }
        sweep.primary = fit_power_law(ax, sg, fit_coords::log_log);
    } else if (is_skew) {
        sweep.primary = fit_power_law(axis, sigma, fit_coords::log_lin);
        sweep.secondary = fit_power_law(axis, sigma, fit_coords::loglog_lin);
    } else {
        sweep.primary = fit_power_law(axis, sigma, fit_coords::log_log);
    }
    rep.sweep = std::move(sweep);

    const auto t1 = std::chrono::steady_clock::now();
    rep.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    rep.samples_per_second =
        rep.wall_seconds > 0.0 ? static_cast<double>(total_samples) / rep.wall_seconds : 0.0;
    return rep;
}

// Runs the same job under (a) the deterministic generator against OS
// entropy and (b) the binary against the ternary delay model, reporting
// mutual DKW containment and the physical-unit stddev comparison.
inline experiment_report run_cross_validation(const experiment_config& cfg) {
    cfg.validate();
    if (cfg.scen != scenario::cross_validate) {
        throw config_error("run_cross_validation handles cross-validate only");
    }
    detail::enforce_resource_guard(cfg);

    const auto t0 = std::chrono::steady_clock::now();
    experiment_report rep;
    rep.config = cfg;
    rep.config_hash = cfg.hash();

    const std::int32_t h = cfg.heights.front();
    const std::int32_t d = cfg.deltas.empty() ? 1 : cfg.deltas.front();
    const cone_spec spec{h, d};
    const delay_model primary = cfg.model;
    const delay_model alternate = primary.kind == delay_kind::binary_fair_coin
                                      ? delay_model::ternary()
                                      : delay_model::binary();

    auto run_one = [&](const delay_model& m, rng_algorithm alg) {
        return detail::run_batch(spec, m, alg, cfg.master_seed, cfg.samples,
                                 cfg.effective_workers(), true, true);
    };
    const auto base = run_one(primary, cfg.rng);
    const auto os_run = run_one(primary, rng_algorithm::os_entropy);
    const auto alt = run_one(alternate, cfg.rng);

    cross_validation_result cv;
    const double eps = dkw_epsilon(cfg.samples, cfg.alpha);
    cv.dkw_eps_sum = 2.0 * eps;

    auto classify = [&](double dist) {
        if (cv.dkw_eps_sum >= 1.0) return verdict::inconclusive;
        return dist <= cv.dkw_eps_sum ? verdict::pass : verdict::fail;
    };

    cv.rng_delay_distance = cdf_sup_distance(base.delay_hist, 1, os_run.delay_hist, 1);
    cv.rng_skew_distance = cdf_sup_distance(base.skew_hist, 1, os_run.skew_hist, 1);
    cv.rng_delay = classify(cv.rng_delay_distance);
    cv.rng_skew = classify(cv.rng_skew_distance);

    cv.model_delay_distance =
        cdf_sup_distance(base.delay_hist, primary.resolution, alt.delay_hist, alternate.resolution);
    cv.model_skew_distance =
        cdf_sup_distance(base.skew_hist, primary.resolution, alt.skew_hist, alternate.resolution);
    cv.model_delay = classify(cv.model_delay_distance);
    cv.model_skew = classify(cv.model_skew_distance);

    const auto& bin = primary.kind == delay_kind::binary_fair_coin ? base : alt;
    const auto& ter = primary.kind == delay_kind::binary_fair_coin ? alt : base;
    const auto& bin_model = primary.kind == delay_kind::binary_fair_coin ? primary : alternate;
    const auto& ter_model = primary.kind == delay_kind::binary_fair_coin ? alternate : primary;
    cv.sigma_delay_binary = to_physical(bin.delay_hist.stddev(), bin_model);
    cv.sigma_skew_binary = to_physical(bin.skew_hist.stddev(), bin_model);
    cv.sigma_delay_ternary = to_physical(ter.delay_hist.stddev(), ter_model);
    cv.sigma_skew_ternary = to_physical(ter.skew_hist.stddev(), ter_model);

    rep.cross = cv;

    experiment_config base_cfg = cfg;
    rep.distributions.push_back(
        detail::analyze_distribution(base_cfg, h, d, base.skew_hist, true));

    const auto t1 = std::chrono::steady_clock::now();
    rep.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    rep.samples_per_second =
        rep.wall_seconds > 0.0 ? 3.0 * static_cast<double>(cfg.samples) / rep.wall_seconds : 0.0;
    return rep;
}

inline json report_to_json(const experiment_report& rep) {
    json j;
    j["config"] = rep.config.to_json();
    j["config_hash"] = rep.config_hash;
    j["version"] = rep.version;
    j["draw_order"] = rep.draw_order;
    j["seed"] = rep.config.master_seed;
    json dists = json::array();
    for (const auto& r : rep.distributions) {
        dists.push_back(detail::distribution_to_json(r, rep.config));
    }
    j["distributions"] = std::move(dists);
    if (rep.sweep) {
        json rows = json::array();
        for (const auto& r : rep.sweep->rows) {
            rows.push_back({{"axis", r.axis},
                            {"n", r.n},
                            {"mean", r.mean},
                            {"stddev", r.stddev},
                            {"stddev_lo", r.stddev_lo},
                            {"stddev_hi", r.stddev_hi}});
        }
        json fits;
        fits["primary"] = {{"coords", to_string(rep.sweep->primary.coords)},
                           {"slope", rep.sweep->primary.slope},
                           {"intercept", rep.sweep->primary.intercept},
                           {"residual_norm", rep.sweep->primary.residual_norm}};
        if (rep.sweep->secondary) {
            fits["secondary"] = {{"coords", to_string(rep.sweep->secondary->coords)},
                                 {"slope", rep.sweep->secondary->slope},
                                 {"intercept", rep.sweep->secondary->intercept},
                                 {"residual_norm", rep.sweep->secondary->residual_norm}};
        }
        j["sweep"] = {{"rows", std::move(rows)}, {"fits", std::move(fits)}};
    }
    if (rep.cross) {
        const auto& cv = *rep.cross;
        j["cross_validation"] = {
            {"rng_delay", to_string(cv.rng_delay)},
            {"rng_skew", to_string(cv.rng_skew)},
            {"model_delay", to_string(cv.model_delay)},
            {"model_skew", to_string(cv.model_skew)},
            {"rng_delay_distance", cv.rng_delay_distance},
            {"rng_skew_distance", cv.rng_skew_distance},
            {"model_delay_distance", cv.model_delay_distance},
            {"model_skew_distance", cv.model_skew_distance},
            {"dkw_eps_sum", cv.dkw_eps_sum},
            {"sigma_delay_binary", cv.sigma_delay_binary},
            {"sigma_delay_ternary", cv.sigma_delay_ternary},
            {"sigma_skew_binary", cv.sigma_skew_binary},
            {"sigma_skew_ternary", cv.sigma_skew_ternary}};
    }
    if (!rep.recorded_grid.is_null()) j["recorded_grid"] = rep.recorded_grid;
    j["timing"] = {{"wall_seconds", rep.wall_seconds},
                   {"samples_per_second", rep.samples_per_second}};
    return j;
}

} // namespace trix
