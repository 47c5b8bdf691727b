#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "trix/enumerate.hpp"
#include "trix/errors.hpp"
#include "trix/histogram.hpp"
#include "trix/stats.hpp"

namespace trix {

using json = nlohmann::json;

// Deterministic decimal formatting: 15 significant digits, point decimal
// separator, no locale.
inline std::string format_double(double v, int digits = 15) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

// Leading "# key=value" lines carried by every CSV the toolkit writes.
struct csv_metadata {
    std::map<std::string, std::string> kv;

    void set(const std::string& key, const std::string& value) { kv[key] = value; }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }

    bool has(const std::string& key) const { return kv.count(key) != 0; }
};

namespace detail {

inline void write_metadata(std::ostream& os, const csv_metadata& meta) {
    for (const auto& [k, v] : meta.kv) os << "# " << k << "=" << v << "\n";
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw config_error("cannot open for writing: " + path.string());
    return os;
}

} // namespace detail

// Histogram CSV: value,count,phat,pmin,pmax. Band columns are empty when no
// band is supplied.
inline void write_histogram_csv(const std::filesystem::path& path, const histogram& hist,
                                const confidence_band* band, const csv_metadata& meta) {
    auto os = detail::open_out(path);
    detail::write_metadata(os, meta);
    os << "value,count,phat,pmin,pmax\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const std::int64_t v = hist.offset + static_cast<std::int64_t>(i);
        os << v << "," << hist.counts[i] << "," << format_double(hist.phat(v));
        if (band) {
            const auto iv = band->at(v);
            os << "," << format_double(iv.lo) << "," << format_double(iv.hi);
        } else {
            os << ",,";
        }
        os << "\n";
    }
}

// Accepts the canonical histogram schema (value,count,...) or rate tables
// (value,rate) scaled by a declared sample count: metadata "n=..." or the
// `declared_n` argument. Rounded rate counts must re-sum to the declared n
// within one per row.
inline histogram load_histogram_csv(const std::filesystem::path& path,
                                    csv_metadata* meta_out = nullptr,
                                    std::uint64_t declared_n = 0) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open histogram file: " + path.string());

    csv_metadata meta;
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;

    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                std::string value = line.substr(eq + 1);
                while (!key.empty() && key.front() == ' ') key.erase(key.begin());
                while (!key.empty() && key.back() == ' ') key.pop_back();
                meta.set(key, value);
            }
            continue;
        }
        header = detail::split_csv_row(line);
        break;
    }
    if (header.empty()) throw parse_error("histogram file has no header row", row);

    int value_col = -1, count_col = -1, rate_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& h = header[i];
        if (h == "value" || h == "x") value_col = static_cast<int>(i);
        if (h == "count") count_col = static_cast<int>(i);
        if (h == "rate" || h == "phat") rate_col = static_cast<int>(i);
    }
    if (value_col < 0 || (count_col < 0 && rate_col < 0)) {
        throw parse_error("histogram header needs a value column and a count or rate column", row);
    }

    std::uint64_t n_for_rates = declared_n;
    if (n_for_rates == 0 && meta.has("n")) {
        n_for_rates = std::strtoull(meta.get("n").c_str(), nullptr, 10);
    }
    if (count_col < 0 && n_for_rates == 0) {
        throw config_error("rate-mode histogram needs a declared sample count (metadata n= or --n)");
    }

    histogram h;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        const auto cols = detail::split_csv_row(line);
        if (static_cast<int>(cols.size()) <= value_col ||
            static_cast<int>(cols.size()) <= std::max(count_col, rate_col)) {
            throw parse_error("short row in histogram file", row);
        }
        try {
            const std::int64_t v = std::stoll(cols[static_cast<std::size_t>(value_col)]);
            std::uint64_t c;
            if (count_col >= 0) {
                const long long raw = std::stoll(cols[static_cast<std::size_t>(count_col)]);
                if (raw < 0) throw parse_error("negative count", row);
                c = static_cast<std::uint64_t>(raw);
            } else {
                const double rate = std::stod(cols[static_cast<std::size_t>(rate_col)]);
                if (rate < 0.0 || rate > 1.0) throw parse_error("rate outside [0, 1]", row);
                c = static_cast<std::uint64_t>(
                    std::llround(rate * static_cast<double>(n_for_rates)));
            }
            ++rows;
            if (c != 0) h.add(v, c);
        } catch (const parse_error&) {
            throw;
        } catch (const std::exception&) {
            throw parse_error("malformed histogram row", row);
        }
    }
    if (rows == 0) throw parse_error("histogram file has no data rows", row);

    if (count_col < 0) {
        const std::uint64_t missum = h.n > n_for_rates ? h.n - n_for_rates : n_for_rates - h.n;
        if (missum > rows) {
            throw config_error("rate-mode counts mis-sum by " + std::to_string(missum) +
                               " against declared n, more than one per bucket");
        }
    }
    h.trim();
    if (meta_out) *meta_out = meta;
    return h;
}

struct sweep_row {
    double axis = 0.0;
    std::uint64_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double stddev_lo = 0.0;
    double stddev_hi = 0.0;
};

// Sweep CSV: axis,n,mean,stddev,stddev_lo,stddev_hi.
inline void write_sweep_csv(const std::filesystem::path& path, const std::vector<sweep_row>& rows,
                            const csv_metadata& meta) {
    auto os = detail::open_out(path);
    detail::write_metadata(os, meta);
    os << "axis,n,mean,stddev,stddev_lo,stddev_hi\n";
    for (const auto& r : rows) {
        os << format_double(r.axis) << "," << r.n << "," << format_double(r.mean) << ","
           << format_double(r.stddev) << "," << format_double(r.stddev_lo) << ","
           << format_double(r.stddev_hi) << "\n";
    }
}

inline std::vector<sweep_row> load_sweep_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open sweep file: " + path.string());
    std::vector<sweep_row> rows;
    std::string line;
    std::size_t row = 0;
    bool saw_header = false;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            saw_header = true;
            continue;
        }
        const auto cols = detail::split_csv_row(line);
        if (cols.size() < 6) throw parse_error("short row in sweep file", row);
        try {
            rows.push_back({std::stod(cols[0]), std::stoull(cols[1]), std::stod(cols[2]),
                            std::stod(cols[3]), std::stod(cols[4]), std::stod(cols[5])});
        } catch (const std::exception&) {
            throw parse_error("malformed sweep row", row);
        }
    }
    return rows;
}

// QQ CSV: x,quantile.
inline void write_qq_csv(const std::filesystem::path& path,
                         const std::vector<std::pair<double, double>>& points,
                         const csv_metadata& meta) {
    auto os = detail::open_out(path);
    detail::write_metadata(os, meta);
    os << "x,quantile\n";
    for (const auto& [x, q] : points) {
        os << format_double(x) << "," << format_double(q) << "\n";
    }
}

// Exact pmf CSV: value,probability (15 significant digits).
inline void write_exact_pmf_csv(const std::filesystem::path& path, const exact_pmf& pmf,
                                const csv_metadata& meta) {
    auto os = detail::open_out(path);
    detail::write_metadata(os, meta);
    os << "value,probability\n";
    for (const auto& [v, c] : pmf.counts) {
        os << v << ","
           << format_double(static_cast<double>(c) / static_cast<double>(pmf.total)) << "\n";
    }
}

// Exact pmf JSON: value -> [numerator, denominator], fully reduced.
inline json exact_pmf_to_json(const exact_pmf& pmf) {
    json values = json::object();
    for (const auto& [v, c] : pmf.counts) {
        const rational p = pmf.prob(v);
        values[std::to_string(v)] = json::array({p.num, p.den});
    }
    return json{{"values", values}, {"wires", pmf.wires}, {"total_assignments", pmf.total}};
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    auto os = detail::open_out(path);
    os << j.dump(2) << "\n";
}

// FNV-1a over a canonical string; used to stamp outputs with a config hash.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace trix
