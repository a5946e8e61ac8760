#include "hashbreak/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hashbreak/dctlab.hpp"
#include "hashbreak/errors.hpp"
#include "hashbreak/hashkit.hpp"
#include "hashbreak/image_io.hpp"
#include "hashbreak/parallel.hpp"
#include "hashbreak/report.hpp"
#include "hashbreak/scanner.hpp"
#include "hashbreak/wbattack.hpp"

namespace hashbreak::cli {
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

HashAlgorithm algo_from(const CliConfig& cfg, const std::string& fallback = "phash") {
    const std::string name = cfg.str("algo", fallback);
    const auto algo = parse_algorithm(lower(name));
    if (!algo) throw InvalidConfig("unknown algorithm '" + name + "'");
    return *algo;
}

Norm norm_from(const std::string& s) {
    const std::string v = lower(s);
    if (v == "1" || v == "l1") return Norm::L1;
    if (v == "2" || v == "l2") return Norm::L2;
    if (v == "inf" || v == "linf") return Norm::Linf;
    throw InvalidConfig("p must be 1, 2 or inf, got '" + s + "'");
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    return hashkit::median(std::move(v));
}

// Index into the default threshold table used to pick the diversity start.
std::size_t threshold_index(HashAlgorithm algo, double t) {
    const auto table = nes::default_thresholds(algo);
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (t <= table[i]) return i;
    }
    return table.size() - 1;
}

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

// ---- hash ------------------------------------------------------------------

int cmd_hash(const CliConfig& cfg, Streams io) {
    const fs::path corpus = cfg.str("corpus", "");
    const fs::path out_db = cfg.str("db", "");
    if (corpus.empty() || out_db.empty()) throw InvalidConfig("hash needs --corpus and --db");
    const HashAlgorithm algo = algo_from(cfg);
    const double threshold = cfg.real("threshold", nes::default_thresholds(algo).front());
    const auto threads = static_cast<std::size_t>(cfg.u64("threads", default_thread_count()));

    if (!fs::is_directory(corpus)) throw IoError("corpus is not a readable directory: " + corpus.string());
    const auto files = list_images(corpus);

    std::vector<std::optional<Hash>> hashes(files.size());
    std::vector<std::string> errors(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) {
        try {
            hashes[i] = hashkit::hash(load_image(corpus / files[i]), algo);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });

    scanner::HashDb db(algo, threshold);
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (hashes[i]) {
            db.add(files[i], *hashes[i]);
        } else {
            io.err << "skip " << files[i] << ": " << errors[i] << "\n";
            ++skipped;
        }
    }
    if (db.empty()) {
        io.err << "error: no readable images in " << corpus.string() << "\n";
        return kInputError;
    }
    db.save(out_db);
    if (skipped) io.err << skipped << " file(s) skipped\n";
    io.out << "hashed " << db.size() << " images with " << algorithm_name(algo) << " -> "
           << out_db.string() << "\n";
    return kOk;
}

// ---- attack ----------------------------------------------------------------

int cmd_attack(const CliConfig& cfg, Streams io) {
    const fs::path image = cfg.str("image", "");
    if (image.empty()) throw InvalidConfig("attack needs --image");
    const HashAlgorithm algo = algo_from(cfg);
    const nes::AttackConfig base_cfg = resolve_attack_config(cfg, algo);
    const bool diverse = cfg.flag("diverse", false);
    const auto runs = static_cast<std::size_t>(cfg.u64("runs", 1));
    if (runs == 0) throw InvalidConfig("runs must be >= 1");
    const fs::path out_dir = cfg.str("out_dir", ".");

    const Image x = load_image(image);
    fs::create_directories(out_dir);
    const auto oracle = nes::BlackBoxOracle::for_algorithm(algo);
    const Hash original = hashkit::hash(x, algo);
    const std::string stem = image.stem().string();

    std::vector<Hash> modified;
    std::vector<std::string> names;
    std::size_t successes = 0;
    for (std::size_t run = 0; run < runs; ++run) {
        nes::AttackConfig run_cfg = base_cfg;
        run_cfg.seed = base_cfg.seed + run;
        const nes::AttackReport r = nes::attack(x, oracle, run_cfg);

        const Image perturbed = apply_perturbation(x, r.delta);
        const std::string name = runs == 1 ? stem : stem + "_run" + std::to_string(run);
        const fs::path png_path = out_dir / (name + ".png");
        save_image(perturbed, png_path);
        const Hash mod = hashkit::hash(perturbed, algo);
        const Hash saved = hashkit::hash(load_image(png_path), algo);

        report::AttackContext ctx;
        ctx.image = image.string();
        ctx.algo = algo;
        ctx.run = run;
        ctx.diverse = diverse;
        ctx.original_hash = original.to_string();
        ctx.modified_hash = mod.to_string();
        ctx.saved_distance = distance(original, saved);
        auto j = report::attack_json(r, run_cfg, ctx);
        j["saved_hash"] = saved.to_string();
        j["saved_success"] = ctx.saved_distance > run_cfg.threshold;
        report::write_atomic(out_dir / (name + ".json"), j.dump(2) + "\n");

        io.out << name << ": " << (r.success ? "success" : "failure") << " after " << r.iterations
               << " iterations, d=" << r.f_final << " (T=" << run_cfg.threshold
               << "), l2/pixel=" << r.l2_per_pixel << ", saved d=" << ctx.saved_distance << "\n";
        successes += r.success ? 1 : 0;
        modified.push_back(mod);
        names.push_back(name);
    }

    if (runs > 1) {
        report::Json pairs = report::Json::array();
        std::vector<double> dists;
        for (std::size_t i = 0; i < runs; ++i) {
            for (std::size_t j = i + 1; j < runs; ++j) {
                const double d = distance(modified[i], modified[j]);
                dists.push_back(d);
                pairs.push_back({{"a", names[i]}, {"b", names[j]}, {"distance", d}});
            }
        }
        report::Json summary;
        summary["image"] = image.string();
        summary["algorithm"] = std::string(algorithm_name(algo));
        summary["threshold"] = base_cfg.threshold;
        summary["runs"] = runs;
        summary["successes"] = successes;
        summary["median_pairwise_distance"] = median_of(dists);
        summary["pairwise"] = pairs;
        report::write_atomic(out_dir / (stem + "_diversity.json"), summary.dump(2) + "\n");
        io.out << successes << "/" << runs << " successful, median pairwise distance "
               << median_of(dists) << "\n";
    }
    return successes == runs ? kOk : kAttackFailed;
}

// ---- white-box ---------------------------------------------------------------

int cmd_wb(const CliConfig& cfg, Streams io, bool sampling) {
    const fs::path image = cfg.str("image", "");
    if (image.empty()) throw InvalidConfig("white-box attacks need --image");
    const auto k = static_cast<std::size_t>(cfg.u64("k", 32));
    const auto a = static_cast<std::size_t>(cfg.u64("a", 1));
    const auto b = static_cast<std::size_t>(cfg.u64("b", 8));
    const double threshold =
        cfg.real("threshold", nes::default_thresholds(HashAlgorithm::PHashContinuous).front());
    const std::uint64_t seed = cfg.u64("seed", 0);
    const fs::path out_dir = cfg.str("out_dir", ".");
    const dctlab::DctMap map(k, a, b);

    const Image x = hashkit::resize(hashkit::grayscale(load_image(image)), k, k);
    report::WbContext ctx;
    ctx.image = image.string();
    ctx.kind = sampling ? "wb_sample" : "wb_optim";
    ctx.k = k;
    ctx.a = a;
    ctx.b = b;
    ctx.threshold = threshold;
    ctx.seed = nes::attack_seed(x, seed);
    ctx.max_samples = cfg.u64("max_samples", 1000000);
    ctx.max_iterations = static_cast<std::size_t>(cfg.u64("max_iterations", 1000));
    ctx.restarts = static_cast<std::size_t>(cfg.u64("restarts", 10));

    wb::WbResult r;
    if (sampling) {
        try {
            r = wb::wb_sample(x, map, threshold, ctx.max_samples, ctx.seed);
        } catch (const Exhausted& e) {
            r.delta = Perturbation::zeros_like(x);
            r.samples = e.samples();
        }
    } else {
        r = wb::wb_optimize(x, map, threshold, ctx.max_iterations, ctx.restarts, ctx.seed);
    }

    fs::create_directories(out_dir);
    const std::string name = image.stem().string() + "_" + ctx.kind;
    save_image(apply_perturbation(x, r.delta), out_dir / (name + ".png"));
    report::write_atomic(out_dir / (name + ".json"), report::wb_json(r, ctx).dump(2) + "\n");
    io.out << name << ": " << (r.success ? "success" : "failure") << ", ||delta||=" << r.delta_norm
           << ", ||A delta||=" << r.feature_norm << ", T=" << threshold << ", samples=" << r.samples
           << "\n";
    return r.success ? kOk : kAttackFailed;
}

// ---- eval ------------------------------------------------------------------

std::vector<std::pair<std::string, Hash>> hash_dir(const fs::path& dir, HashAlgorithm algo,
                                                   std::size_t threads, std::ostream& err) {
    const auto files = list_images(dir);
    std::vector<std::optional<Hash>> hashes(files.size());
    std::vector<std::string> errors(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) {
        try {
            hashes[i] = hashkit::hash(load_image(dir / files[i]), algo);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    std::vector<std::pair<std::string, Hash>> out;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (hashes[i]) {
            out.emplace_back(files[i], *hashes[i]);
        } else {
            err << "skip " << files[i] << ": " << errors[i] << "\n";
        }
    }
    return out;
}

std::string drop_extension(const std::string& id) {
    const fs::path p(id);
    return (p.parent_path() / p.stem()).generic_string();
}

// Attacked files are named after their original; fall back to matching
// without the extension since attack output is always PNG.
std::string original_id(const scanner::HashDb& db, const std::string& file) {
    if (db.find(file) != db.size()) return file;
    const std::string key = drop_extension(file);
    std::string found;
    for (const auto& r : db.records()) {
        if (drop_extension(r.id) == key) {
            if (!found.empty()) throw UnknownId("ambiguous original for '" + file + "'");
            found = r.id;
        }
    }
    if (found.empty()) throw UnknownId("no db record matches attacked file '" + file + "'");
    return found;
}

int cmd_eval(const CliConfig& cfg, Streams io) {
    const fs::path db_path = cfg.str("db", "");
    const fs::path queries_dir = cfg.str("out_of_db", "");
    if (db_path.empty() || queries_dir.empty()) throw InvalidConfig("eval needs --db and --out-of-db");
    const auto db = scanner::HashDb::load(db_path);
    if (cfg.has("algo") && algo_from(cfg) != db.algorithm()) {
        io.err << "error: db holds " << algorithm_name(db.algorithm()) << " hashes but --algo is "
               << cfg.str("algo", "") << "\n";
        return kInputError;
    }
    const auto threads = static_cast<std::size_t>(cfg.u64("threads", default_thread_count()));
    auto thresholds = cfg.reals("thresholds");
    if (thresholds.empty()) thresholds = nes::default_thresholds(db.algorithm());

    if (!fs::is_directory(queries_dir)) throw IoError("not a directory: " + queries_dir.string());
    std::vector<Hash> queries;
    for (auto& [id, h] : hash_dir(queries_dir, db.algorithm(), threads, io.err)) queries.push_back(h);
    if (queries.empty()) throw EmptyQuerySet("no readable images in " + queries_dir.string());

    std::vector<std::pair<std::string, Hash>> attacked;
    if (cfg.has("attacked")) {
        const fs::path dir = cfg.str("attacked", "");
        if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
        for (auto& [file, h] : hash_dir(dir, db.algorithm(), threads, io.err)) {
            attacked.emplace_back(original_id(db, file), h);
        }
    }
    if (attacked.empty()) io.err << "warning: no attacked images, FNR column omitted\n";

    const auto rows = scanner::evaluate(db, queries, attacked, thresholds);
    std::ostringstream csv;
    csv << (attacked.empty() ? "threshold,fpr,n,m\n" : "threshold,fpr,fnr,n,m\n");
    for (const auto& r : rows) {
        csv << report::fmt17(r.threshold) << "," << report::fmt17(r.fpr);
        if (r.has_fnr) csv << "," << report::fmt17(r.fnr);
        csv << "," << r.n << "," << r.m << "\n";
    }
    if (cfg.has("out")) {
        report::write_atomic(cfg.str("out", ""), csv.str());
    } else {
        io.out << csv.str();
    }
    return kOk;
}

// ---- flagprob --------------------------------------------------------------

int cmd_flagprob(const CliConfig& cfg, Streams io) {
    scanner::FlagModel m;
    m.n = cfg.u64("n", 1000);
    m.l = cfg.u64("l", 100);
    m.fpr = cfg.real("fpr", 0.0);
    m.fnr = cfg.real("fnr", 0.0);
    try {
        m.validate();
    } catch (const OutOfRange& e) {
        throw InvalidConfig(e.what());
    }
    const std::uint64_t kmax = std::min(cfg.u64("kmax", std::min<std::uint64_t>(m.n, 20)), m.n);
    const auto non = scanner::flag_pmf(m, scanner::User::NonOffender);
    const auto off = scanner::flag_pmf(m, scanner::User::Offender);
    auto tail = [](const std::vector<double>& pmf, std::uint64_t k) {
        double acc = 0.0;
        for (std::size_t i = pmf.size(); i-- > k;) acc += pmf[i];
        return acc;
    };
    std::ostringstream csv;
    csv << "k,p_non_offender_ge_k,p_offender_ge_k\n";
    for (std::uint64_t k = 1; k <= kmax; ++k) {
        csv << k << "," << report::fmt17(tail(non, k)) << "," << report::fmt17(tail(off, k)) << "\n";
    }
    if (cfg.has("out")) {
        report::write_atomic(cfg.str("out", ""), csv.str());
    } else {
        io.out << csv.str();
    }
    return kOk;
}

// ---- verify ----------------------------------------------------------------

int cmd_verify(const CliConfig& cfg, Streams io) {
    const auto k = static_cast<std::size_t>(cfg.u64("k", 32));
    const auto a = static_cast<std::size_t>(cfg.u64("a", 1));
    const auto b = static_cast<std::size_t>(cfg.u64("b", 8));
    const auto rep = dctlab::verify_properties(k, a, b);
    const std::size_t cc = rep.c * rep.c;
    const bool counts_ok = rep.unit_eigenvalues == cc && rep.null_eigenvalues == k * k - cc &&
                           rep.other_eigenvalues == 0;
    io.out << "k=" << k << " a=" << a << " b=" << b << " c=" << rep.c << "\n"
           << "MM^T residual     " << rep.orthogonality_residual << "\n"
           << "M'M'^T residual   " << rep.slice_residual << "\n"
           << "AA^T residual     " << rep.aat_residual << "\n"
           << "operator residual " << rep.operator_residual << "\n"
           << "eigenvalues       " << rep.unit_eigenvalues << " unit, " << rep.null_eigenvalues
           << " null, " << rep.other_eigenvalues << " other ("
           << (rep.eigensolver_used ? "symmetric eigensolve" : "rank") << ")\n";
    if (cfg.has("dump")) {
        // Eigenvalues are listed only when the eigensolver ran (k <= 16).
        const fs::path dir = cfg.str("dump", "");
        fs::create_directories(dir);
        const dctlab::Matrix m = dctlab::dct_matrix(k);
        std::ostringstream mcsv;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                mcsv << (j ? "," : "") << report::fmt17(m(i, j));
            }
            mcsv << "\n";
        }
        report::write_atomic(dir / "dct_matrix.csv", mcsv.str());
        std::ostringstream csv;
        csv << "index,eigenvalue\n";
        for (std::size_t i = 0; i < rep.spectrum.size(); ++i) {
            csv << i << "," << report::fmt17(rep.spectrum[i]) << "\n";
        }
        report::write_atomic(dir / "spectrum.csv", csv.str());
    }
    if (!rep.ok() || !counts_ok) {
        io.err << "property violation: AA^T residual " << rep.aat_residual << ", MM^T residual "
               << rep.orthogonality_residual << ", expected " << cc << " unit / " << k * k - cc
               << " null eigenvalues\n";
        return kPropertyViolation;
    }
    io.out << "ok\n";
    return kOk;
}

} // namespace

// ---- CliConfig ---------------------------------------------------------------

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        // attack
        "attack_side", "eps0", "eps_step", "plateau_window", "samples", "max_iterations",
        "momentum", "step", "sigma", "p", "threshold", "eps_start", "seed", "threads",
        // selections and paths
        "algo", "image", "corpus", "db", "out", "out_dir", "out_of_db", "attacked", "thresholds",
        "diverse", "runs", "dump",
        // white-box and dctlab
        "k", "a", "b", "max_samples", "restarts",
        // flag model
        "n", "l", "fpr", "fnr", "kmax"};
    return keys;
}

CliConfig CliConfig::parse(const std::string& text) {
    CliConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidConfig("config line " + std::to_string(lineno) + ": expected key=value");
        }
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

CliConfig CliConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void CliConfig::set(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw InvalidConfig("unknown config key '" + key + "'");
    }
    values_[key] = value;
}

std::optional<std::string> CliConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string CliConfig::str(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double CliConfig::real(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const double d = std::stod(*v, &used);
        if (used == v->size() && std::isfinite(d)) return d;
    } catch (const std::exception&) {
    }
    throw InvalidConfig(key + " must be a finite number, got '" + *v + "'");
}

std::uint64_t CliConfig::u64(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        if (!v->empty() && (*v)[0] != '-') {
            const unsigned long long n = std::stoull(*v, &used, 0);
            if (used == v->size()) return n;
        }
    } catch (const std::exception&) {
    }
    throw InvalidConfig(key + " must be a non-negative integer, got '" + *v + "'");
}

bool CliConfig::flag(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    const std::string s = lower(*v);
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw InvalidConfig(key + " must be a boolean, got '" + *v + "'");
}

std::vector<double> CliConfig::reals(const std::string& key) const {
    std::vector<double> out;
    const auto v = get(key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    CliConfig one;
    while (std::getline(ss, item, ',')) {
        one.values_["threshold"] = trim(item);
        out.push_back(one.real("threshold", 0.0));
    }
    return out;
}

nes::AttackConfig resolve_attack_config(const CliConfig& cfg, HashAlgorithm algo) {
    nes::AttackConfig a = nes::AttackConfig::defaults_for(algo);
    const bool diverse = cfg.flag("diverse", false);
    a.attack_side = static_cast<std::size_t>(cfg.u64("attack_side", a.attack_side));
    a.threshold = cfg.real("threshold", a.threshold);
    if (diverse) {
        a.eps0 = 0.25;
        a.eps_step = 0.01;
        a.eps_start = nes::diversity_eps_start(algo, threshold_index(algo, a.threshold));
    }
    a.eps0 = cfg.real("eps0", a.eps0);
    a.eps_step = cfg.real("eps_step", a.eps_step);
    a.plateau_window = static_cast<std::size_t>(cfg.u64("plateau_window", a.plateau_window));
    a.samples = static_cast<std::size_t>(cfg.u64("samples", a.samples));
    a.max_iterations = static_cast<std::size_t>(cfg.u64("max_iterations", a.max_iterations));
    a.momentum = cfg.real("momentum", a.momentum);
    a.step = cfg.real("step", a.step);
    a.sigma = cfg.real("sigma", a.sigma);
    if (cfg.has("p")) a.p = norm_from(cfg.str("p", "2"));
    a.eps_start = cfg.real("eps_start", a.eps_start);
    a.seed = cfg.u64("seed", a.seed);
    a.threads = static_cast<std::size_t>(cfg.u64("threads", a.threads));
    a.validate();
    return a;
}

std::vector<std::string> list_images(const fs::path& dir) {
    static const char* const exts[] = {".png", ".pgm", ".ppm", ".pnm"};
    std::vector<std::string> out;
    std::error_code ec;
    fs::recursive_directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw IoError("cannot read directory " + dir.string() + ": " + ec.message());
    for (const auto& entry : it) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = lower(entry.path().extension().string());
        if (std::find(std::begin(exts), std::end(exts), ext) == std::end(exts)) continue;
        out.push_back(fs::relative(entry.path(), dir).generic_string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- entry point -------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Perceptual hash robustness toolkit: hashing, detection simulation and attacks"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string config_path;
    std::map<std::string, std::string> given;
    std::map<std::string, bool> switches;

    // Registers --<key> (underscores become dashes) as a string option that lands in `given`.
    auto opt = [&](CLI::App* sub, const std::string& key, const std::string& help) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        sub->add_option_function<std::string>(flag, [&given, key](const std::string& v) { given[key] = v; }, help);
    };
    auto with_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value settings file; flags override it");
    };
    auto attack_opts = [&](CLI::App* sub) {
        opt(sub, "attack_side", "side of the square attack grid (default 64)");
        opt(sub, "eps0", "starting per-pixel L_p bound");
        opt(sub, "eps_step", "bound increment on a plateau");
        opt(sub, "plateau_window", "plateau detection window");
        opt(sub, "samples", "NES samples per gradient (even)");
        opt(sub, "max_iterations", "iteration budget");
        opt(sub, "momentum", "momentum mu in [0, 1)");
        opt(sub, "step", "step size eta");
        opt(sub, "sigma", "NES noise scale");
        opt(sub, "p", "norm order: 1, 2 or inf");
        opt(sub, "eps_start", "diversity initialization magnitude");
        opt(sub, "threads", "worker threads (never changes results)");
    };

    auto* hash = app.add_subcommand("hash", "Hash every image in a corpus into a db file");
    with_config(hash);
    opt(hash, "corpus", "input directory");
    opt(hash, "algo", "ahash, dhash, phash, phash-continuous or pdq");
    opt(hash, "db", "output db path");
    opt(hash, "threshold", "threshold stored in the db header");
    opt(hash, "threads", "worker threads");

    auto* attack = app.add_subcommand("attack", "Black-box detection avoidance attack on one image");
    with_config(attack);
    opt(attack, "image", "input image");
    opt(attack, "algo", "target hash algorithm");
    opt(attack, "threshold", "detection threshold T");
    opt(attack, "seed", "attacker seed");
    opt(attack, "out_dir", "output directory for report and image");
    opt(attack, "runs", "number of runs with consecutive seeds");
    attack->add_flag_function("--diverse", [&switches](std::int64_t) { switches["diverse"] = true; },
                              "random initialization for diverse perturbations");
    attack_opts(attack);

    std::map<std::string, CLI::App*> wb;
    for (const char* name : {"wb-sample", "wb-optim"}) {
        auto* sub = app.add_subcommand(name, std::string(name) == "wb-sample"
                                                 ? "White-box rejection sampling on the DCT step"
                                                 : "White-box projected ascent on the DCT step");
        with_config(sub);
        opt(sub, "image", "input image (converted to k x k grayscale)");
        opt(sub, "k", "image side (default 32)");
        opt(sub, "a", "first kept DCT index (default 1)");
        opt(sub, "b", "last kept DCT index (default 8)");
        opt(sub, "threshold", "feature distance T");
        opt(sub, "seed", "attacker seed");
        opt(sub, "out_dir", "output directory");
        if (std::string(name) == "wb-sample") {
            opt(sub, "max_samples", "sample budget (default 1000000)");
        } else {
            opt(sub, "max_iterations", "iterations per restart (default 1000)");
            opt(sub, "restarts", "restart budget (default 10)");
        }
        wb[name] = sub;
    }

    auto* eval = app.add_subcommand("eval", "FPR/FNR sweep over detection thresholds");
    with_config(eval);
    opt(eval, "db", "db file from `hash`");
    opt(eval, "out_of_db", "directory of images not in the db");
    opt(eval, "attacked", "directory of attacked images named after their originals");
    opt(eval, "thresholds", "comma-separated thresholds (default: per-algorithm table)");
    opt(eval, "algo", "expected algorithm of the db");
    opt(eval, "out", "CSV output path (default stdout)");
    opt(eval, "threads", "worker threads");

    auto* flagprob = app.add_subcommand("flagprob", "Tail probabilities of per-user flag counts");
    with_config(flagprob);
    opt(flagprob, "n", "images per user");
    opt(flagprob, "l", "illegal images held by an offender");
    opt(flagprob, "fpr", "false positive rate");
    opt(flagprob, "fnr", "false negative rate");
    opt(flagprob, "kmax", "largest k to report");
    opt(flagprob, "out", "CSV output path (default stdout)");

    auto* verify = app.add_subcommand("verify", "Check the DCT map properties at (k, a, b)");
    with_config(verify);
    opt(verify, "k", "transform size");
    opt(verify, "a", "first kept index");
    opt(verify, "b", "last kept index");
    opt(verify, "dump", "directory for dct_matrix.csv and spectrum.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    Streams io{out, err};
    try {
        CliConfig cfg = config_path.empty() ? CliConfig{} : CliConfig::load(config_path);
        for (const auto& [k, v] : given) cfg.set(k, v);
        for (const auto& [k, v] : switches) cfg.set(k, v ? "true" : "false");

        if (hash->parsed()) return cmd_hash(cfg, io);
        if (attack->parsed()) return cmd_attack(cfg, io);
        if (wb["wb-sample"]->parsed()) return cmd_wb(cfg, io, true);
        if (wb["wb-optim"]->parsed()) return cmd_wb(cfg, io, false);
        if (eval->parsed()) return cmd_eval(cfg, io);
        if (flagprob->parsed()) return cmd_flagprob(cfg, io);
        if (verify->parsed()) return cmd_verify(cfg, io);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

} // namespace hashbreak::cli
