#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trix/enumerate.hpp"
#include "trix/errors.hpp"
#include "trix/experiments.hpp"
#include "trix/io.hpp"
#include "trix/stats.hpp"
#include "trix/version.hpp"

namespace trix {

namespace cli_detail {

inline std::uint64_t parse_seed(const std::string& s) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(s, &pos, 0); // accepts decimal and 0x-hex
        if (pos != s.size()) throw config_error("trailing characters in seed: " + s);
        return v;
    } catch (const config_error&) {
        throw;
    } catch (const std::exception&) {
        throw config_error("cannot parse seed: " + s);
    }
}

// Comma list with optional a-b ranges: "20,50,100" or "1-25".
inline std::vector<std::int32_t> parse_int_list(const std::string& s) {
    std::vector<std::int32_t> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto dash = item.find('-', item[0] == '-' ? 1 : 0);
        try {
            if (dash == std::string::npos) {
                out.push_back(std::stoi(item));
            } else {
                const std::int32_t a = std::stoi(item.substr(0, dash));
                const std::int32_t b = std::stoi(item.substr(dash + 1));
                if (b < a) throw config_error("descending range in list: " + item);
                for (std::int32_t v = a; v <= b; ++v) out.push_back(v);
            }
        } catch (const config_error&) {
            throw;
        } catch (const std::exception&) {
            throw config_error("cannot parse integer list item: " + item);
        }
    }
    if (out.empty()) throw config_error("empty integer list");
    return out;
}

inline std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("TRIX_OUT_DIR"); env && *env) return env;
    return "out";
}

struct common_flags {
    std::string scenario_name;
    std::string heights = "20";
    std::string deltas = "1";
    std::uint64_t samples = 1'000'000;
    std::string seed = "1";
    std::string rng = "xoshiro512ss";
    std::string model = "binary";
    double alpha = 0.01;
    double lambda_min = 2.0;
    unsigned workers = 0;
    bool force = false;
    bool record_grid = false;
    std::string out_dir;
    std::string config_file;
    std::uint64_t ceiling = default_node_update_ceiling;
};

inline void add_common_flags(CLI::App* cmd, common_flags& f, bool with_scenario) {
    if (with_scenario) {
        cmd->add_option("--scenario", f.scenario_name, "Scenario to run");
    }
    cmd->add_option("--height", f.heights, "Grid height H (single value)");
    cmd->add_option("--heights", f.heights, "Comma list of grid heights");
    cmd->add_option("--delta", f.deltas, "Horizontal distance (single value)");
    cmd->add_option("--deltas", f.deltas, "Comma list or a-b range of distances");
    cmd->add_option("--samples", f.samples, "Monte Carlo sample count");
    cmd->add_option("--seed", f.seed, "64-bit master seed, decimal or 0x-hex");
    cmd->add_option("--rng", f.rng, "Generator: xoshiro512ss or os");
    cmd->add_option("--model", f.model, "Delay model: binary|ternary|split[:x]|const:w");
    cmd->add_option("--alpha", f.alpha, "Global failure probability for bounds");
    cmd->add_option("--lambda-min", f.lambda_min, "Tail decay floor for stddev error bars");
    cmd->add_option("--workers", f.workers, "Worker threads (0 = hardware)");
    cmd->add_flag("--force", f.force, "Override resource guards");
    cmd->add_flag("--record-grid", f.record_grid, "Record one full sample grid (diagnostic)");
    cmd->add_option("--out", f.out_dir, "Output directory (default $TRIX_OUT_DIR or ./out)");
    cmd->add_option("--config", f.config_file, "JSON config file; flags override its keys");
    cmd->add_option("--ceiling", f.ceiling, "Node-update guard ceiling");
}

inline experiment_config build_config(const common_flags& f, const CLI::App* cmd,
                                      scenario fallback_scenario) {
    experiment_config cfg;
    if (!f.config_file.empty()) {
        std::ifstream is(f.config_file);
        if (!is) throw config_error("cannot open config file: " + f.config_file);
        json j;
        try {
            is >> j;
        } catch (const std::exception& e) {
            throw config_error(std::string("bad config file: ") + e.what());
        }
        cfg = experiment_config::from_json(j);
    } else {
        cfg.scen = fallback_scenario;
    }

    auto given = [&](const std::string& name) { return cmd->count(name) > 0; };
    if (given("--scenario")) cfg.scen = parse_scenario(f.scenario_name);
    else if (f.config_file.empty()) cfg.scen = fallback_scenario;
    if (given("--height") || given("--heights") || f.config_file.empty()) {
        cfg.heights = parse_int_list(f.heights);
    }
    if (given("--delta") || given("--deltas") || f.config_file.empty()) {
        cfg.deltas = parse_int_list(f.deltas);
    }
    if (given("--samples") || f.config_file.empty()) cfg.samples = f.samples;
    if (given("--seed") || f.config_file.empty()) cfg.master_seed = parse_seed(f.seed);
    if (given("--rng") || f.config_file.empty()) cfg.rng = parse_rng_algorithm(f.rng);
    if (given("--model") || f.config_file.empty()) cfg.model = delay_model::parse(f.model);
    if (given("--alpha") || f.config_file.empty()) cfg.alpha = f.alpha;
    if (given("--lambda-min") || f.config_file.empty()) cfg.lambda_min = f.lambda_min;
    if (given("--workers") || f.config_file.empty()) cfg.workers = f.workers;
    if (given("--ceiling") || f.config_file.empty()) cfg.node_update_ceiling = f.ceiling;
    if (f.force) cfg.force = true;
    if (f.record_grid) cfg.record_grid = true;
    if (given("--out")) {
        cfg.out_dir = f.out_dir;
    } else if (cfg.out_dir.empty()) {
        cfg.out_dir = default_out_dir().string();
    }
    cfg.validate();
    return cfg;
}

inline csv_metadata base_metadata(const experiment_config& cfg) {
    csv_metadata meta;
    meta.set("version", version_string);
    meta.set("draw_order", draw_order_tag);
    meta.set("seed", std::to_string(cfg.master_seed));
    meta.set("config_hash", cfg.hash());
    meta.set("scenario", to_string(cfg.scen));
    meta.set("model", cfg.model.name());
    meta.set("resolution", std::to_string(cfg.model.resolution));
    meta.set("rng", to_string(cfg.rng));
    meta.set("alpha", format_double(cfg.alpha));
    meta.set("n", std::to_string(cfg.samples));
    return meta;
}

inline void echo_config(const experiment_config& cfg) {
    json j = cfg.to_json();
    j["config_hash"] = cfg.hash();
    j["version"] = version_string;
    j["draw_order"] = draw_order_tag;
    std::cout << "effective config: " << j.dump() << "\n";
}

inline void write_distribution_outputs(const experiment_config& cfg,
                                       const experiment_report& rep) {
    const std::filesystem::path out(cfg.out_dir);
    const auto& r = rep.distributions.front();
    csv_metadata meta = base_metadata(cfg);
    meta.set("height", std::to_string(r.height));
    meta.set("delta", std::to_string(r.delta));

    std::string stem;
    switch (cfg.scen) {
        case scenario::delay_pmf: stem = "delay_pmf_h" + std::to_string(r.height); break;
        case scenario::skew_pmf:
            stem = "skew_pmf_h" + std::to_string(r.height) + "_d" + std::to_string(r.delta);
            break;
        default:
            stem = "oracle_h" + std::to_string(r.height) + "_d" + std::to_string(r.delta);
            break;
    }

    write_histogram_csv(out / (stem + ".csv"), r.hist, &r.band, meta);
    if (!r.qq.empty()) write_qq_csv(out / (stem + "_qq.csv"), r.qq, meta);
    if (cfg.scen == scenario::oracle_check) {
        write_exact_pmf_csv(out / (stem + "_exact.csv"), r.oracle, meta);
        write_json(out / (stem + "_exact.json"), exact_pmf_to_json(r.oracle));
    }
    write_json(out / ("report_" + stem + ".json"), report_to_json(rep));

    std::cout << "n=" << r.n << " mean=" << format_double(r.mean_phys)
              << " stddev=" << format_double(r.stddev_phys) << " stddev_interval=["
              << format_double(to_physical(r.stddev_iv.lo, cfg.model)) << ","
              << format_double(to_physical(r.stddev_iv.hi, cfg.model)) << "]\n";
    if (r.tail) std::cout << "tail lambda=" << format_double(r.tail->lambda) << "\n";
    if (r.oracle_dkw_distance) {
        std::cout << "oracle dkw_distance=" << format_double(*r.oracle_dkw_distance)
                  << " within_dkw=" << (*r.oracle_within_dkw ? "yes" : "no")
                  << " within_band=" << (*r.oracle_within_band ? "yes" : "no") << "\n";
    }
    std::cout << "wrote " << (out / (stem + ".csv")).string() << "\n";
}

inline int cmd_simulate(const common_flags& flags, const CLI::App* cmd) {
    experiment_config cfg = build_config(flags, cmd, scenario::delay_pmf);
    if (cfg.scen != scenario::delay_pmf && cfg.scen != scenario::skew_pmf &&
        cfg.scen != scenario::oracle_check) {
        throw config_error("simulate accepts delay-pmf, skew-pmf or oracle-check");
    }
    echo_config(cfg);
    const experiment_report rep = run_distribution(cfg);
    write_distribution_outputs(cfg, rep);
    if (cfg.scen == scenario::oracle_check && !*rep.distributions.front().oracle_within_dkw) {
        throw inconsistency_error("Monte Carlo histogram escapes the oracle's DKW band");
    }
    return 0;
}

inline int cmd_sweep(const common_flags& flags, const CLI::App* cmd) {
    experiment_config cfg = build_config(flags, cmd, scenario::delay_sweep);
    if (cfg.scen != scenario::delay_sweep && cfg.scen != scenario::skew_sweep &&
        cfg.scen != scenario::delta_sweep) {
        throw config_error("sweep accepts delay-sweep, skew-sweep or delta-sweep");
    }
    echo_config(cfg);
    const experiment_report rep = run_sweep(cfg);

    const std::filesystem::path out(cfg.out_dir);
    csv_metadata meta = base_metadata(cfg);
    const std::string stem = to_string(cfg.scen);
    write_sweep_csv(out / (stem + ".csv"), rep.sweep->rows, meta);
    write_json(out / ("report_" + stem + ".json"), report_to_json(rep));

    std::cout << "fit " << to_string(rep.sweep->primary.coords)
              << " slope=" << format_double(rep.sweep->primary.slope)
              << " residual=" << format_double(rep.sweep->primary.residual_norm) << "\n";
    if (rep.sweep->secondary) {
        std::cout << "fit " << to_string(rep.sweep->secondary->coords)
                  << " slope=" << format_double(rep.sweep->secondary->slope)
                  << " residual=" << format_double(rep.sweep->secondary->residual_norm) << "\n";
    }
    std::cout << "wrote " << (out / (stem + ".csv")).string() << "\n";
    return 0;
}

inline int cmd_cross_validate(const common_flags& flags, const CLI::App* cmd) {
    experiment_config cfg = build_config(flags, cmd, scenario::cross_validate);
    cfg.scen = scenario::cross_validate;
    echo_config(cfg);
    const experiment_report rep = run_cross_validation(cfg);
    const auto& cv = *rep.cross;

    const std::filesystem::path out(cfg.out_dir);
    csv_metadata meta = base_metadata(cfg);
    const auto& r = rep.distributions.front();
    write_histogram_csv(out / "cross_validate_skew.csv", r.hist, &r.band, meta);
    write_json(out / "report_cross_validate.json", report_to_json(rep));

    std::cout << "rng pair: delay=" << to_string(cv.rng_delay) << " skew="
              << to_string(cv.rng_skew) << " (distances "
              << format_double(cv.rng_delay_distance) << ", "
              << format_double(cv.rng_skew_distance) << ", allowance "
              << format_double(cv.dkw_eps_sum) << ")\n";
    std::cout << "model pair: delay=" << to_string(cv.model_delay)
              << " skew=" << to_string(cv.model_skew) << "\n";
    std::cout << "skew stddev binary=" << format_double(cv.sigma_skew_binary)
              << " ternary=" << format_double(cv.sigma_skew_ternary) << "\n";
    return 0;
}

inline int cmd_enumerate(const std::string& heights, const std::string& deltas,
                         const std::string& target, const std::string& model_name,
                         std::uint64_t guard, bool force, const std::string& out_dir,
                         const CLI::App* cmd) {
    const std::int32_t h = parse_int_list(heights).front();
    const std::int32_t d = parse_int_list(deltas).front();
    const delay_model model = delay_model::parse(model_name);
    if (force) guard = ~0ull >> 1;

    exact_pmf pmf;
    std::string stem;
    if (target == "delay") {
        pmf = exact_delay_pmf(h, model, guard);
        stem = "exact_delay_h" + std::to_string(h);
    } else if (target == "skew") {
        pmf = exact_skew_pmf(h, d, model, guard);
        stem = "exact_skew_h" + std::to_string(h) + "_d" + std::to_string(d);
    } else {
        throw config_error("enumerate target must be delay or skew");
    }

    csv_metadata meta;
    meta.set("version", version_string);
    meta.set("draw_order", draw_order_tag);
    meta.set("model", model.name());
    meta.set("resolution", std::to_string(model.resolution));
    meta.set("height", std::to_string(h));
    if (target == "skew") meta.set("delta", std::to_string(d));
    meta.set("wires", std::to_string(pmf.wires));
    meta.set("total_assignments", std::to_string(pmf.total));

    if (cmd->count("--out") > 0 || std::getenv("TRIX_OUT_DIR")) {
        const std::filesystem::path out =
            out_dir.empty() ? default_out_dir() : std::filesystem::path(out_dir);
        write_exact_pmf_csv(out / (stem + ".csv"), pmf, meta);
        write_json(out / (stem + ".json"), exact_pmf_to_json(pmf));
        std::cout << "wrote " << (out / (stem + ".csv")).string() << "\n";
    } else {
        std::cout << "value,probability\n";
        for (const auto& [v, c] : pmf.counts) {
            std::cout << v << ","
                      << format_double(static_cast<double>(c) / static_cast<double>(pmf.total))
                      << "\n";
        }
    }
    const rational mean = pmf.mean();
    std::cerr << "exact mean = " << mean.num << "/" << mean.den << "\n";
    return 0;
}

inline int cmd_analyze(const std::string& input, std::uint64_t declared_n, double alpha,
                       bool want_dkw, bool want_band, const std::string& tail_range,
                       const std::string& tail_side_name, bool want_stddev_interval,
                       double lambda_min, const std::string& out_dir, const CLI::App* cmd) {
    csv_metadata in_meta;
    const histogram hist = load_histogram_csv(input, &in_meta, declared_n);
    std::cout << "loaded " << input << ": n=" << hist.n << " support=[" << hist.min_value()
              << "," << hist.max_value() << "]\n";
    std::cout << "mean=" << format_double(hist.mean())
              << " stddev=" << format_double(hist.n >= 2 ? hist.stddev() : 0.0) << "\n";

    if (want_dkw) {
        const double eps = dkw_epsilon(hist.n, alpha);
        std::cout << "dkw eps(n=" << hist.n << ", alpha=" << format_double(alpha)
                  << ") = " << format_double(eps) << "\n";
        if (hist.n == 20'000'000 && std::abs(alpha - 0.01) < 1e-12) {
            std::cout << "note: the commonly quoted half-width 0.0005147 matches n = 10000000 "
                         "at alpha = 0.01; for n = 20000000 the formula gives "
                      << format_double(eps) << "\n";
        }
    }

    std::optional<confidence_band> band;
    if (want_band || want_stddev_interval) {
        band = compute_confidence_band(hist, alpha);
        std::cout << "band: buckets=" << band->buckets
                  << " alpha_prime=" << format_double(band->alpha_prime)
                  << " pooled_pmax=" << format_double(band->pooled_pmax) << "\n";
    }

    if (!tail_range.empty()) {
        const auto colon = tail_range.find(':');
        if (colon == std::string::npos) {
            throw config_error("tail fit range must look like LO:HI");
        }
        const std::int64_t k_lo = std::stoll(tail_range.substr(0, colon));
        const std::int64_t k_hi = std::stoll(tail_range.substr(colon + 1));
        tail_side side = tail_side::pooled;
        if (tail_side_name == "left") side = tail_side::left;
        else if (tail_side_name == "right") side = tail_side::right;
        else if (tail_side_name != "pooled") throw config_error("side must be left, right or pooled");
        const tail_fit fit = fit_exponential_tail(hist, k_lo, k_hi, side);
        std::cout << "tail fit [" << k_lo << "," << k_hi << "] side=" << to_string(side)
                  << ": lambda=" << format_double(fit.lambda)
                  << " residual=" << format_double(fit.residual_norm) << "\n";
    }

    if (want_stddev_interval) {
        const auto iv = stddev_interval(hist, *band, lambda_min);
        std::cout << "stddev interval=[" << format_double(iv.lo) << "," << format_double(iv.hi)
                  << "] bootstrap=[" << format_double(iv.bootstrap_lo) << ","
                  << format_double(iv.bootstrap_hi) << "]\n";
    }

    if (cmd->count("--out") > 0) {
        const std::filesystem::path out =
            out_dir.empty() ? default_out_dir() : std::filesystem::path(out_dir);
        csv_metadata meta;
        meta.set("version", version_string);
        meta.set("source", input);
        meta.set("alpha", format_double(alpha));
        meta.set("n", std::to_string(hist.n));
        write_histogram_csv(out / "analyze_histogram.csv", hist,
                            band ? &*band : nullptr, meta);
        std::cout << "wrote " << (out / "analyze_histogram.csv").string() << "\n";
    }
    return 0;
}

inline int cmd_qq(const std::string& input, std::uint64_t declared_n, double mu, double sigma,
                  const std::string& out_dir, const CLI::App* cmd) {
    csv_metadata in_meta;
    const histogram hist = load_histogram_csv(input, &in_meta, declared_n);
    const auto points = ecdf_and_qq(hist, mu, sigma);
    if (cmd->count("--out") > 0) {
        const std::filesystem::path out =
            out_dir.empty() ? default_out_dir() : std::filesystem::path(out_dir);
        csv_metadata meta;
        meta.set("version", version_string);
        meta.set("source", input);
        meta.set("mu", format_double(mu));
        meta.set("sigma", format_double(sigma));
        meta.set("n", std::to_string(hist.n));
        write_qq_csv(out / "qq.csv", points, meta);
        std::cout << "wrote " << (out / "qq.csv").string() << "\n";
    } else {
        std::cout << "x,quantile\n";
        for (const auto& [x, q] : points) {
            std::cout << format_double(x) << "," << format_double(q) << "\n";
        }
    }
    return 0;
}

} // namespace cli_detail

// Entry point shared by the binary and the tests. Exit codes: 0 success,
// 1 configuration error, 2 guard refusal, 3 internal inconsistency.
inline int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"TRIX clock-distribution grid simulator and analysis toolkit"};
    app.require_subcommand(1);

    cli_detail::common_flags sim_flags, sweep_flags, cross_flags;

    auto* sim = app.add_subcommand("simulate", "Estimate a delay or skew distribution");
    cli_detail::add_common_flags(sim, sim_flags, true);

    auto* sweep = app.add_subcommand("sweep", "Run distribution estimates over H or delta");
    cli_detail::add_common_flags(sweep, sweep_flags, true);

    auto* cross = app.add_subcommand("cross-validate",
                                     "Compare generators and delay models on one job");
    cli_detail::add_common_flags(cross, cross_flags, false);

    auto* enumerate = app.add_subcommand("enumerate", "Exact distribution by exhaustive enumeration");
    std::string enum_heights = "2", enum_deltas = "1", enum_target = "delay",
                enum_model = "binary", enum_out;
    std::uint64_t enum_guard = default_enumeration_guard;
    bool enum_force = false;
    enumerate->add_option("--height", enum_heights, "Grid height H");
    enumerate->add_option("--delta", enum_deltas, "Horizontal distance (skew target)");
    enumerate->add_option("--target", enum_target, "delay or skew");
    enumerate->add_option("--model", enum_model, "Delay model");
    enumerate->add_option("--guard", enum_guard, "Assignment-count guard");
    enumerate->add_flag("--force", enum_force, "Lift the enumeration guard");
    enumerate->add_option("--out", enum_out, "Output directory (omit to print CSV)");

    auto* analyze = app.add_subcommand("analyze", "Statistics over a stored histogram CSV");
    std::string an_input, an_tail_range, an_side = "pooled", an_out;
    std::uint64_t an_n = 0;
    double an_alpha = 0.01, an_lambda = 2.0;
    bool an_dkw = false, an_band = false, an_iv = false;
    analyze->add_option("--input", an_input, "Histogram CSV (counts or rates)")->required();
    analyze->add_option("--n", an_n, "Declared sample count for rate tables");
    analyze->add_option("--alpha", an_alpha, "Failure probability for bounds");
    analyze->add_flag("--dkw", an_dkw, "Report the DKW half-width");
    analyze->add_flag("--band", an_band, "Compute the per-value confidence band");
    analyze->add_option("--tail-fit", an_tail_range, "Exponential tail fit range LO:HI");
    analyze->add_option("--side", an_side, "Tail side: left, right or pooled");
    analyze->add_flag("--stddev-interval", an_iv, "Extremal + bootstrap stddev interval");
    analyze->add_option("--lambda-min", an_lambda, "Tail decay floor");
    analyze->add_option("--out", an_out, "Output directory");

    auto* qq = app.add_subcommand("qq", "Normal quantile-quantile transform of a histogram");
    std::string qq_input, qq_out;
    std::uint64_t qq_n = 0;
    double qq_mu = 0.0, qq_sigma = 1.0;
    qq->add_option("--input", qq_input, "Histogram CSV (counts or rates)")->required();
    qq->add_option("--n", qq_n, "Declared sample count for rate tables");
    qq->add_option("--mu", qq_mu, "Reference normal mean")->required();
    qq->add_option("--sigma", qq_sigma, "Reference normal stddev")->required();
    qq->add_option("--out", qq_out, "Output directory (omit to print CSV)");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("trix");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (sim->parsed()) return cli_detail::cmd_simulate(sim_flags, sim);
        if (sweep->parsed()) return cli_detail::cmd_sweep(sweep_flags, sweep);
        if (cross->parsed()) return cli_detail::cmd_cross_validate(cross_flags, cross);
        if (enumerate->parsed()) {
            return cli_detail::cmd_enumerate(enum_heights, enum_deltas, enum_target, enum_model,
                                             enum_guard, enum_force, enum_out, enumerate);
        }
        if (analyze->parsed()) {
            return cli_detail::cmd_analyze(an_input, an_n, an_alpha, an_dkw, an_band,
                                           an_tail_range, an_side, an_iv, an_lambda, an_out,
                                           analyze);
        }
        if (qq->parsed()) {
            return cli_detail::cmd_qq(qq_input, qq_n, qq_mu, qq_sigma, qq_out, qq);
        }
        std::cerr << "error: no subcommand\n" << app.help();
        return 1;
    } catch (const guard_error& e) {
        std::cerr << "guard refusal: " << e.what() << "\n";
        return 2;
    } catch (const inconsistency_error& e) {
        std::cerr << "inconsistency: " << e.what() << "\n";
        return 3;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace trix
