#include "hashbreak/scanner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "hashbreak/errors.hpp"

namespace hashbreak::scanner {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        out.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("bad ") + what + ": '" + s + "'");
    }
}

// log C(n, k) p^k (1-p)^(n-k), exact at the p = 0 and p = 1 edges.
double log_binom_pmf(std::uint64_t n, std::uint64_t k, double p) {
    if (k > n) return kNegInf;
    if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
    if (p == 1.0) return k == n ? 0.0 : kNegInf;
    const auto dn = static_cast<double>(n), dk = static_cast<double>(k);
    return std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0) +
           dk * std::log(p) + (dn - dk) * std::log1p(-p);
}

std::vector<double> log_binom(std::uint64_t n, double p) {
    std::vector<double> out(n + 1);
    for (std::uint64_t k = 0; k <= n; ++k) out[k] = log_binom_pmf(n, k, p);
    return out;
}

} // namespace

HashDb::HashDb(HashAlgorithm algo, double threshold) : algo_(algo), threshold_(0.0) {
    set_threshold(threshold);
}

void HashDb::set_threshold(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidConfig("threshold must be finite and >= 0");
    threshold_ = t;
}

void HashDb::add(std::string id, Hash hash) {
    if (hash.algorithm() != algo_) {
        throw AlgorithmMismatch("db holds " + std::string(algorithm_name(algo_)) + " hashes, got " +
                                std::string(algorithm_name(hash.algorithm())));
    }
    if (id.empty() || id.find_first_of("\t\n\r") != std::string::npos) {
        throw InvalidConfig("record id must be non-empty and free of tabs and newlines");
    }
    if (find(id) != records_.size()) throw InvalidConfig("duplicate record id '" + id + "'");
    records_.push_back({std::move(id), std::move(hash)});
}

std::size_t HashDb::find(const std::string& id) const {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (records_[i].id == id) return i;
    }
    return records_.size();
}

std::string HashDb::serialize() const {
    std::string out = "hashdb\t" + std::string(algorithm_name(algo_)) + "\t" +
                      std::string(metric_name(metric())) + "\t" + format17(threshold_) + "\n";
    for (const auto& r : records_) {
        out += r.id + "\t" + std::string(algorithm_name(algo_)) + "\t" + r.hash.to_string() + "\n";
    }
    return out;
}

HashDb HashDb::deserialize(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty hash db");
    const auto head = split_tabs(line);
    if (head.size() != 4 || head[0] != "hashdb") throw ParseError("missing hashdb header");
    const auto algo = parse_algorithm(head[1]);
    if (!algo) throw ParseError("unknown algorithm '" + head[1] + "'");
    const auto metric = parse_metric(head[2]);
    if (!metric || *metric != metric_for(*algo)) {
        throw ParseError("metric '" + head[2] + "' does not fit " + head[1]);
    }
    HashDb db(*algo, parse_double(head[3], "threshold"));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_tabs(line);
        if (f.size() != 3) throw ParseError("line " + std::to_string(lineno) + ": expected 3 fields");
        const auto rec_algo = parse_algorithm(f[1]);
        if (!rec_algo || *rec_algo != *algo) {
            throw AlgorithmMismatch("line " + std::to_string(lineno) + ": algorithm '" + f[1] +
                                    "' in a " + head[1] + " db");
        }
        db.add(f[0], Hash::parse(*algo, f[2]));
    }
    return db;
}

void HashDb::save(const std::filesystem::path& path) const {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << serialize();
        if (!out) throw IoError("write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move db into place at " + path.string() + ": " + ec.message());
}

HashDb HashDb::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

MatchResult match(const HashDb& db, const Hash& q, double threshold) {
    if (db.empty()) throw EmptyDb("match against an empty hash db");
    if (q.algorithm() != db.algorithm()) {
        throw AlgorithmMismatch("query is " + std::string(algorithm_name(q.algorithm())) +
                                ", db is " + std::string(algorithm_name(db.algorithm())));
    }
    MatchResult best;
    best.min_distance = std::numeric_limits<double>::infinity();
    const auto& recs = db.records();
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const double d = distance(recs[i].hash, q);
        if (d < best.min_distance) {
            best.min_distance = d;
            best.nearest = i;
        }
    }
    best.flagged = best.min_distance <= threshold;
    return best;
}

double estimate_fpr(const HashDb& db, const std::vector<Hash>& queries, double threshold) {
    if (queries.empty()) throw EmptyQuerySet("FPR needs at least one out-of-db query");
    std::size_t flagged = 0;
    for (const auto& q : queries) flagged += match(db, q, threshold).flagged ? 1 : 0;
    return static_cast<double>(flagged) / static_cast<double>(queries.size());
}

double estimate_fnr(const HashDb& db, const std::vector<std::pair<std::string, Hash>>& attacked,
                    double threshold) {
    if (attacked.empty()) throw EmptyQuerySet("FNR needs at least one modified image");
    std::size_t missed = 0;
    for (const auto& [id, h] : attacked) {
        if (db.find(id) == db.size()) throw UnknownId("original id '" + id + "' is not in the db");
        missed += match(db, h, threshold).flagged ? 0 : 1;
    }
    return static_cast<double>(missed) / static_cast<double>(attacked.size());
}

std::vector<EvalRow> evaluate(const HashDb& db, const std::vector<Hash>& queries,
                              const std::vector<std::pair<std::string, Hash>>& attacked,
                              const std::vector<double>& thresholds) {
    if (queries.empty()) throw EmptyQuerySet("FPR needs at least one out-of-db query");
    // Distances do not depend on T, so compute them once.
    std::vector<double> q_dist, a_dist;
    q_dist.reserve(queries.size());
    for (const auto& q : queries) q_dist.push_back(match(db, q, 0.0).min_distance);
    for (const auto& [id, h] : attacked) {
        if (db.find(id) == db.size()) throw UnknownId("original id '" + id + "' is not in the db");
        a_dist.push_back(match(db, h, 0.0).min_distance);
    }
    std::vector<EvalRow> rows;
    for (double t : thresholds) {
        EvalRow row;
        row.threshold = t;
        row.n = db.size();
        row.m = queries.size();
        row.attacked = attacked.size();
        const auto flagged = std::count_if(q_dist.begin(), q_dist.end(), [&](double d) { return d <= t; });
        row.fpr = static_cast<double>(flagged) / static_cast<double>(queries.size());
        if (!a_dist.empty()) {
            const auto missed = std::count_if(a_dist.begin(), a_dist.end(), [&](double d) { return d > t; });
            row.fnr = static_cast<double>(missed) / static_cast<double>(a_dist.size());
            row.has_fnr = true;
        }
        rows.push_back(row);
    }
    return rows;
}

double daily_false_flags(double fpr, double daily_volume, double prevalence) {
    return fpr * (1.0 - prevalence) * daily_volume;
}

void FlagModel::validate() const {
    if (l > n) throw OutOfRange("l = " + std::to_string(l) + " exceeds N = " + std::to_string(n));
    if (!(fpr >= 0.0 && fpr <= 1.0)) throw OutOfRange("fpr must lie in [0, 1]");
    if (!(fnr >= 0.0 && fnr <= 1.0)) throw OutOfRange("fnr must lie in [0, 1]");
}

std::vector<double> flag_pmf(const FlagModel& model, User user) {
    model.validate();
    std::vector<double> pmf(model.n + 1, 0.0);
    if (user == User::NonOffender) {
        const auto lp = log_binom(model.n, model.fpr);
        for (std::size_t k = 0; k < pmf.size(); ++k) pmf[k] = std::exp(lp[k]);
        return pmf;
    }
    // N2 = Bin(l, 1 - FNR) + Bin(N - l, FPR), convolved with log-sum-exp.
    const auto caught = log_binom(model.l, 1.0 - model.fnr);
    const auto false_hits = log_binom(model.n - model.l, model.fpr);
    std::vector<double> terms;
    for (std::uint64_t k = 0; k <= model.n; ++k) {
        terms.clear();
        const std::uint64_t j_lo = k > model.n - model.l ? k - (model.n - model.l) : 0;
        const std::uint64_t j_hi = std::min(k, model.l);
        double peak = kNegInf;
        for (std::uint64_t j = j_lo; j <= j_hi; ++j) {
            const double t = caught[j] + false_hits[k - j];
            terms.push_back(t);
            peak = std::max(peak, t);
        }
        if (peak == kNegInf) continue;
        double acc = 0.0;
        for (double t : terms) acc += std::exp(t - peak);
        pmf[k] = std::exp(peak + std::log(acc));
    }
    return pmf;
}

double flag_prob(const FlagModel& model, User user, std::uint64_t k) {
    model.validate();
    if (k > model.n) throw OutOfRange("k = " + std::to_string(k) + " exceeds N = " + std::to_string(model.n));
    if (user == User::NonOffender) return std::exp(log_binom_pmf(model.n, k, model.fpr));
    return flag_pmf(model, user)[k];
}

double flag_tail(const FlagModel& model, User user, std::uint64_t k) {
    model.validate();
    if (k > model.n + 1) throw OutOfRange("k = " + std::to_string(k) + " exceeds N + 1");
    const auto pmf = flag_pmf(model, user);
    double acc = 0.0;
    for (std::uint64_t i = model.n + 1; i-- > k;) acc += pmf[i];
    return std::min(acc, 1.0);
}

} // namespace hashbreak::scanner
