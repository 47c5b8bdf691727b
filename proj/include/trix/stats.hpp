#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "trix/enumerate.hpp"
#include "trix/errors.hpp"
#include "trix/histogram.hpp"
#include "trix/rng.hpp"

#include <random>

namespace trix {

// Inverse standard-normal CDF: Acklam's rational approximation with one
// fixed Halley correction through erfc, giving absolute error well below
// 1e-8 across the representable domain. Deterministic, no iteration.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw config_error("normal quantile requires 0 < p < 1");

    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley step against the exact CDF expressed via erfc.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

// Half-width of the uniform CDF confidence band: sqrt(ln(2/alpha) / (2n)).
inline double dkw_epsilon(std::uint64_t n, double alpha) {
    if (n < 1) throw config_error("dkw_epsilon requires n >= 1");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw config_error("dkw_epsilon requires 0 < alpha <= 2");
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

struct prob_interval {
    double lo = 0.0;
    double hi = 1.0;
};

// Per-value probability bounds obtained by inverting the multiplicative
// Chernoff tail bounds at the observed count k out of n:
//   upper tail  (e^d / (1+d)^(1+d))^(np)  with d = k/(np) - 1, p <= k/n,
//   lower tail  exp(-n p d^2 / 2)         with d = 1 - k/(np), p >= k/n.
// p_max is the smallest p whose lower-tail bound reaches alpha'; p_min the
// largest p whose upper-tail bound reaches alpha' (0 when k = 0). Both are
// located by bisection to relative tolerance 1e-9.
inline prob_interval chernoff_bucket_bounds(std::uint64_t k, std::uint64_t n, double alpha_prime) {
    if (n == 0) throw config_error("chernoff bounds require n >= 1");
    if (k > n) throw config_error("count exceeds sample size");
    if (!(alpha_prime > 0.0 && alpha_prime < 1.0)) {
        throw config_error("per-bucket failure probability must lie in (0, 1)");
    }

    const double ln_alpha = std::log(alpha_prime);
    const double kk = static_cast<double>(k);
    const double nn = static_cast<double>(n);
    const double phat = kk / nn;

    double p_max = 1.0;
    if (k < n) {
        auto log_lower_tail = [&](double p) {
            const double delta = 1.0 - phat / p;
            return -0.5 * nn * p * delta * delta;
        };
        if (log_lower_tail(1.0) <= ln_alpha) {
            double lo = phat, hi = 1.0;
            for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (log_lower_tail(mid) <= ln_alpha) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            p_max = hi;
        }
    }

    double p_min = 0.0;
    if (k > 0) {
        auto log_upper_tail = [&](double p) {
            const double mu = nn * p;
            return (kk - mu) - kk * std::log(kk / mu);
        };
        double lo = phat;
        for (int it = 0; it < 4000 && log_upper_tail(lo) > ln_alpha; ++it) lo *= 0.5;
        if (log_upper_tail(lo) <= ln_alpha) {
            double hi = phat;
            for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (log_upper_tail(mid) <= ln_alpha) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            p_min = lo;
        }
    }

    return {p_min, p_max};
}

enum class band_method { dkw, chernoff_bucket };

struct bucket_policy {
    // Restrict per-value buckets to [lo, hi]; observed mass outside the
    // window joins the pooled bucket. Default: the full observed support.
    std::optional<std::pair<std::int64_t, std::int64_t>> window;
};

// Simultaneous per-value probability bounds: every nonzero value in the
// window is its own Chernoff bucket, everything else (zero counts in the
// window, mass outside it, unobserved tail) pools into one bucket, and the
// per-bucket failure probability alpha' = alpha / #buckets makes the union
// bound hold at level alpha. A DKW half-width at the same alpha is carried
// alongside for CDF-level statements.
struct confidence_band {
    std::int64_t offset = 0;
    std::vector<prob_interval> per_value;
    double pooled_pmax = 0.0;
    double alpha = 0.0;
    double alpha_prime = 0.0;
    std::uint64_t buckets = 0;
    double dkw_eps = 0.0;
    std::uint64_t n = 0;
    band_method method = band_method::chernoff_bucket;

    std::int64_t min_value() const { return offset; }
    std::int64_t max_value() const {
        return offset + static_cast<std::int64_t>(per_value.size()) - 1;
    }

    prob_interval at(std::int64_t v) const {
        if (v < min_value() || v > max_value()) return {0.0, pooled_pmax};
        return per_value[static_cast<std::size_t>(v - offset)];
    }
};

inline confidence_band compute_confidence_band(const histogram& hist, double alpha,
                                               bucket_policy policy = {}) {
    if (hist.n == 0) throw config_error("confidence band of an empty histogram");
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must lie in (0, 1)");

    std::int64_t lo = hist.min_value(), hi = hist.max_value();
    if (policy.window) {
        lo = std::max(lo, policy.window->first);
        hi = std::min(hi, policy.window->second);
        if (lo > hi) throw config_error("bucket window does not intersect the support");
    }

    std::uint64_t nonzero = 0, inside = 0;
    for (std::int64_t v = lo; v <= hi; ++v) {
        const std::uint64_t c = hist.count_at(v);
        if (c != 0) ++nonzero;
        inside += c;
    }

    confidence_band band;
    band.offset = lo;
    band.alpha = alpha;
    band.n = hist.n;
    band.buckets = nonzero + 1;
    band.alpha_prime = alpha / static_cast<double>(band.buckets);
    band.dkw_eps = dkw_epsilon(hist.n, alpha);
    band.per_value.resize(static_cast<std::size_t>(hi - lo + 1));

    const std::uint64_t pooled_count = hist.n - inside;
    band.pooled_pmax = chernoff_bucket_bounds(pooled_count, hist.n, band.alpha_prime).hi;

    for (std::int64_t v = lo; v <= hi; ++v) {
        const std::uint64_t c = hist.count_at(v);
        band.per_value[static_cast<std::size_t>(v - lo)] =
            c == 0 ? prob_interval{0.0, band.pooled_pmax}
                   : chernoff_bucket_bounds(c, hist.n, band.alpha_prime);
    }
    return band;
}

// True iff the exact pmf (same scaled units) lies inside the band: every
// nonzero-bucket value within its interval and the total remaining mass
// within the pooled bound.
inline bool pmf_within_band(const exact_pmf& pmf, const confidence_band& band,
                            const histogram& hist) {
    double pooled_mass = 0.0;
    for (const auto& [v, c] : pmf.counts) {
        const double p = static_cast<double>(c) / static_cast<double>(pmf.total);
        if (hist.count_at(v) != 0) {
            const auto iv = band.at(v);
            if (p < iv.lo - 1e-15 || p > iv.hi + 1e-15) return false;
        } else {
            pooled_mass += p;
        }
    }
    return pooled_mass <= band.pooled_pmax + 1e-15;
}

// sup_x |F_a(x) - F_b(x)| between two scaled-integer CDFs, compared in
// physical units: value/res_a against value/res_b.
inline double cdf_sup_distance(const histogram& a, std::int32_t res_a, const histogram& b,
                               std::int32_t res_b) {
    if (a.n == 0 || b.n == 0) throw config_error("cdf distance of an empty histogram");
    const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);

    std::size_t ia = 0, ib = 0;
    std::uint64_t ca = 0, cb = 0;
    double dist = 0.0;
    while (ia < a.counts.size() || ib < b.counts.size()) {
        // Physical positions keyed on the common grid value * (other res).
        const std::int64_t ka = ia < a.counts.size()
                                    ? (a.offset + static_cast<std::int64_t>(ia)) * res_b
                                    : std::numeric_limits<std::int64_t>::max();
        const std::int64_t kb = ib < b.counts.size()
                                    ? (b.offset + static_cast<std::int64_t>(ib)) * res_a
                                    : std::numeric_limits<std::int64_t>::max();
        if (ka <= kb) ca += a.counts[ia++];
        if (kb <= ka) cb += b.counts[ib++];
        dist = std::max(dist, std::abs(static_cast<double>(ca) / na -
                                       static_cast<double>(cb) / nb));
    }
    return dist;
}

// sup_x |F_hist(x) - F_exact(x)| in the shared scaled units.
inline double cdf_sup_distance(const histogram& a, const exact_pmf& b) {
    if (a.n == 0 || b.total == 0) throw config_error("cdf distance of an empty distribution");
    const double na = static_cast<double>(a.n), nb = static_cast<double>(b.total);

    std::size_t ia = 0;
    auto itb = b.counts.begin();
    std::uint64_t ca = 0, cb = 0;
    double dist = 0.0;
    while (ia < a.counts.size() || itb != b.counts.end()) {
        const std::int64_t ka = ia < a.counts.size()
                                    ? a.offset + static_cast<std::int64_t>(ia)
                                    : std::numeric_limits<std::int64_t>::max();
        const std::int64_t kb =
            itb != b.counts.end() ? itb->first : std::numeric_limits<std::int64_t>::max();
        if (ka <= kb) ca += a.counts[ia++];
        if (kb <= ka) cb += (itb++)->second;
        dist = std::max(dist, std::abs(static_cast<double>(ca) / na -
                                       static_cast<double>(cb) / nb));
    }
    return dist;
}

struct stddev_interval_result {
    double lo = 0.0;
    double hi = 0.0;
    double bootstrap_lo = 0.0;
    double bootstrap_hi = 0.0;
    double point = 0.0;
};

namespace detail {

struct tail_moments {
    double mass = 0.0, m1 = 0.0, m2 = 0.0;
};

// Moments of mass `t` spread geometrically beyond `edge` in direction `dir`
// with weights proportional to exp(-lambda * j), j = 1, 2, ...
inline tail_moments geometric_tail_moments(double t, double edge, double dir, double lambda) {
    tail_moments out;
    if (t <= 0.0) return out;
    const double r = std::exp(-lambda);
    const double wsum = r / (1.0 - r); // sum of r^j, j >= 1
    double rj = 1.0;
    for (int j = 1; j < 100000; ++j) {
        rj *= r;
        const double w = rj / wsum * t;
        const double v = edge + dir * j;
        out.mass += w;
        out.m1 += w * v;
        out.m2 += w * v * v;
        if (rj < 1e-18) break;
    }
    return out;
}

struct band_cell {
    std::int64_t value = 0;
    double lo = 0.0, hi = 0.0;
    bool pooled = false; // zero-count cell drawing capacity from the pool
};

inline double extremize_stddev(const histogram& hist, const confidence_band& band,
                               double lambda_min, bool outward) {
    const double center = hist.mean();

    std::vector<band_cell> cells;
    cells.reserve(band.per_value.size());
    double base = 0.0;
    for (std::size_t i = 0; i < band.per_value.size(); ++i) {
        const std::int64_t v = band.offset + static_cast<std::int64_t>(i);
        const bool zero = hist.count_at(v) == 0;
        cells.push_back({v, zero ? 0.0 : band.per_value[i].lo,
                         zero ? band.pooled_pmax : band.per_value[i].hi, zero});
        base += cells.back().lo;
    }
    if (base > 1.0 + 1e-12) {
        throw inconsistency_error("confidence band cannot renormalize: lower bounds exceed 1");
    }
    double remaining = std::max(0.0, 1.0 - base);
    double pool_budget = band.pooled_pmax;

    std::stable_sort(cells.begin(), cells.end(), [&](const band_cell& a, const band_cell& b) {
        const double da = std::abs(static_cast<double>(a.value) - center);
        const double db = std::abs(static_cast<double>(b.value) - center);
        return outward ? da > db : da < db;
    });

    double mass = base;
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < band.per_value.size(); ++i) {
        const std::int64_t v = band.offset + static_cast<std::int64_t>(i);
        const double lo = hist.count_at(v) == 0 ? 0.0 : band.per_value[i].lo;
        m1 += lo * static_cast<double>(v);
        m2 += lo * static_cast<double>(v) * static_cast<double>(v);
    }

    // The geometric tail beyond the support edge is the farthest bucket; it
    // takes mass first when pushing outward and only as a last resort when
    // pulling inward. Its capacity shares the pooled budget with the
    // zero-count cells.
    const double lo_edge = static_cast<double>(band.min_value());
    const double hi_edge = static_cast<double>(band.max_value());
    const bool tail_on_high = std::abs(hi_edge + 1.0 - center) >= std::abs(lo_edge - 1.0 - center);
    const double tail_edge = tail_on_high ? hi_edge : lo_edge;
    const double tail_dir = tail_on_high ? 1.0 : -1.0;

    auto allocate_tail = [&]() {
        const double t = std::min(remaining, pool_budget);
        if (t <= 0.0) return;
        const auto tm = geometric_tail_moments(t, tail_edge, tail_dir, lambda_min);
        mass += tm.mass;
        m1 += tm.m1;
        m2 += tm.m2;
        remaining -= t;
        pool_budget -= t;
    };

    if (outward) allocate_tail();
    for (const auto& cell : cells) {
        if (remaining <= 0.0) break;
        double cap = cell.hi - cell.lo;
        if (cell.pooled) cap = std::min(cap, pool_budget);
        const double take = std::min(cap, remaining);
        if (take <= 0.0) continue;
        mass += take;
        m1 += take * static_cast<double>(cell.value);
        m2 += take * static_cast<double>(cell.value) * static_cast<double>(cell.value);
        remaining -= take;
        if (cell.pooled) pool_budget -= take;
    }
    if (!outward) allocate_tail();

    if (remaining > 1e-9) {
        throw inconsistency_error("confidence band cannot renormalize: upper bounds sum below 1");
    }

    const double mu = m1 / mass;
    const double var = std::max(0.0, m2 / mass - mu * mu);
    const double bessel =
        static_cast<double>(band.n) / static_cast<double>(band.n - 1);
    return std::sqrt(var * bessel);
}

struct xoshiro_urbg {
    xoshiro512ss gen;
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ull; }
    result_type operator()() { return gen.next(); }
};

} // namespace detail

// Extremizes the standard deviation over pmfs compatible with the band:
// per-value probabilities within their buckets, total mass renormalized to
// one, and unobserved mass placed geometrically (decay at least lambda_min)
// beyond the observed support edge. The reported interval comes from the
// two monotone extremal assignments: mass pulled toward the empirical mean
// for the lower end, pushed out to the constrained tail for the upper end.
// A percentile bootstrap over multinomial resamples is attached as an
// independent cross-check.
inline stddev_interval_result stddev_interval(const histogram& hist, const confidence_band& band,
                                              double lambda_min,
                                              std::uint32_t bootstrap_resamples = 1000,
                                              std::uint64_t bootstrap_seed = 0x17ac5eed) {
    if (hist.n < 2) throw config_error("stddev interval requires n >= 2");
    if (!(lambda_min > 0.0)) throw config_error("tail decay floor must be positive");

    stddev_interval_result out;
    out.point = hist.stddev();
    out.lo = detail::extremize_stddev(hist, band, lambda_min, false);
    out.hi = detail::extremize_stddev(hist, band, lambda_min, true);
    out.lo = std::min(out.lo, out.point);
    out.hi = std::max(out.hi, out.point);

    if (bootstrap_resamples > 0) {
        detail::xoshiro_urbg urbg{xoshiro512ss::from_u64(bootstrap_seed)};
        std::vector<double> sigmas;
        sigmas.reserve(bootstrap_resamples);
        for (std::uint32_t rep = 0; rep < bootstrap_resamples; ++rep) {
            std::uint64_t left = hist.n;
            double prob_left = 1.0;
            long double s1 = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < hist.counts.size() && left > 0; ++i) {
                if (hist.counts[i] == 0) continue;
                const double p = static_cast<double>(hist.counts[i]) / static_cast<double>(hist.n);
                std::uint64_t k;
                if (p >= prob_left) {
                    k = left;
                } else {
                    std::binomial_distribution<std::uint64_t> bin(left, std::clamp(p / prob_left, 0.0, 1.0));
                    k = bin(urbg);
                }
                prob_left -= p;
                left -= k;
                const double v = static_cast<double>(hist.offset + static_cast<std::int64_t>(i));
                s1 += static_cast<long double>(k) * v;
                s2 += static_cast<long double>(k) * v * v;
            }
            const long double nn = static_cast<long double>(hist.n);
            const long double var = (s2 - s1 * s1 / nn) / (nn - 1.0L);
            sigmas.push_back(static_cast<double>(std::sqrt(std::max(0.0L, var))));
        }
        std::sort(sigmas.begin(), sigmas.end());
        const double tail = band.alpha / 2.0;
        const auto idx = [&](double q) {
            const double pos = q * static_cast<double>(sigmas.size() - 1);
            return sigmas[static_cast<std::size_t>(std::llround(pos))];
        };
        out.bootstrap_lo = idx(tail);
        out.bootstrap_hi = idx(1.0 - tail);
    }
    return out;
}

// Quantile-quantile transform against Normal(mu, sigma^2): for each
// half-integer x = k + 0.5 across the support, emits
// (x, mu + sigma * Phi^-1(ECDF(x))), omitting points where the ECDF is 0 or 1.
inline std::vector<std::pair<double, double>> ecdf_and_qq(const histogram& hist, double mu,
                                                          double sigma) {
    if (!(sigma > 0.0)) throw config_error("reference sigma must be positive");
    if (hist.n == 0) throw config_error("qq transform of an empty histogram");

    std::vector<std::pair<double, double>> out;
    std::uint64_t cum = 0;
    for (std::size_t i = 0; i + 1 < hist.counts.size(); ++i) {
        cum += hist.counts[i];
        if (cum == 0 || cum == hist.n) continue;
        const double x = static_cast<double>(hist.offset + static_cast<std::int64_t>(i)) + 0.5;
        const double f = static_cast<double>(cum) / static_cast<double>(hist.n);
        out.emplace_back(x, mu + sigma * normal_quantile(f));
    }
    return out;
}

struct ols_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_norm = 0.0;
};

inline ols_fit least_squares_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw config_error("least squares needs matching inputs with >= 2 points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw config_error("least squares with degenerate abscissae");
    ols_fit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        rss += r * r;
    }
    fit.residual_norm = std::sqrt(rss);
    return fit;
}

enum class tail_side { left, right, pooled };

inline const char* to_string(tail_side s) {
    switch (s) {
        case tail_side::left: return "left";
        case tail_side::right: return "right";
        case tail_side::pooled: return "pooled";
    }
    return "?";
}

struct tail_fit {
    double lambda = 0.0;       // decay rate per unit skew
    std::int64_t k_lo = 0, k_hi = 0;
    tail_side side = tail_side::pooled;
    double residual_norm = 0.0;
};

// Least-squares fit of ln p(k) against |k| over [k_lo, k_hi]; lambda is the
// negated slope. The pooled side averages the two tails value by value.
// k = 0 never participates and zero counts in range are an error.
inline tail_fit fit_exponential_tail(const histogram& hist, std::int64_t k_lo, std::int64_t k_hi,
                                     tail_side side) {
    if (k_lo < 1 || k_hi <= k_lo) {
        throw config_error("tail fit range must satisfy k_hi > k_lo >= 1");
    }
    std::vector<double> xs, ys;
    for (std::int64_t m = k_lo; m <= k_hi; ++m) {
        double p = 0.0;
        if (side == tail_side::left) {
            p = hist.phat(-m);
        } else if (side == tail_side::right) {
            p = hist.phat(m);
        } else {
            p = 0.5 * (hist.phat(-m) + hist.phat(m));
        }
        if (p <= 0.0) {
            throw config_error("zero count at |k| = " + std::to_string(m) +
                               " inside the tail fit range");
        }
        xs.push_back(static_cast<double>(m));
        ys.push_back(std::log(p));
    }
    const ols_fit f = least_squares_line(xs, ys);
    return {-f.slope, k_lo, k_hi, side, f.residual_norm};
}

enum class fit_coords { log_log, loglog_lin, log_lin };

inline const char* to_string(fit_coords c) {
    switch (c) {
        case fit_coords::log_log: return "log-log";
        case fit_coords::loglog_lin: return "loglog-lin";
        case fit_coords::log_lin: return "log-lin";
    }
    return "?";
}

struct power_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_norm = 0.0;
    fit_coords coords = fit_coords::log_log;
};

// Ordinary least squares in the requested coordinate transform:
//   log-log     ln(value) against ln(axis)   (power-law exponent),
//   log-lin     value against ln(axis)       (growth per e-fold),
//   loglog-lin  value against ln(ln(axis))   (doubly logarithmic growth).
inline power_fit fit_power_law(std::span<const double> axis, std::span<const double> value,
                               fit_coords coords) {
    if (axis.size() != value.size() || axis.size() < 3) {
        throw config_error("power-law fit needs at least 3 points");
    }
    std::vector<double> xs(axis.size()), ys(value.size());
    for (std::size_t i = 0; i < axis.size(); ++i) {
        switch (coords) {
            case fit_coords::log_log:
                if (axis[i] <= 0.0 || value[i] <= 0.0) {
                    throw config_error("log-log fit requires positive inputs");
                }
                xs[i] = std::log(axis[i]);
                ys[i] = std::log(value[i]);
                break;
            case fit_coords::log_lin:
                if (axis[i] <= 0.0) throw config_error("log-lin fit requires positive axis");
                xs[i] = std::log(axis[i]);
                ys[i] = value[i];
                break;
            case fit_coords::loglog_lin:
                if (axis[i] <= 1.0) throw config_error("loglog-lin fit requires axis > 1");
                xs[i] = std::log(std::log(axis[i]));
                ys[i] = value[i];
                break;
        }
    }
    const ols_fit f = least_squares_line(xs, ys);
    return {f.slope, f.intercept, f.residual_norm, coords};
}

} // namespace trix
