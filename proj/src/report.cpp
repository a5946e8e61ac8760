#include "hashbreak/report.hpp"

#include <cstdio>
#include <fstream>

#include "hashbreak/errors.hpp"

namespace hashbreak::report {

std::string seed_hex(std::uint64_t seed) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(seed));
    return buf;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

const char* norm_name(Norm p) {
    switch (p) {
    case Norm::L1: return "1";
    case Norm::L2: return "2";
    case Norm::Linf: return "inf";
    }
    return "2";
}

} // namespace

Json config_json(const nes::AttackConfig& cfg) {
    Json j;
    j["attack_side"] = cfg.attack_side;
    j["eps0"] = cfg.eps0;
    j["eps_step"] = cfg.eps_step;
    j["plateau_window"] = cfg.plateau_window;
    j["samples"] = cfg.samples;
    j["max_iterations"] = cfg.max_iterations;
    j["momentum"] = cfg.momentum;
    j["step"] = cfg.step;
    j["sigma"] = cfg.sigma;
    j["p"] = norm_name(cfg.p);
    j["threshold"] = cfg.threshold;
    j["eps_start"] = cfg.eps_start;
    j["seed"] = cfg.seed;
    return j;
}

Json attack_json(const nes::AttackReport& r, const nes::AttackConfig& cfg, const AttackContext& ctx) {
    Json j;
    j["attack_kind"] = "black_box";
    j["algorithm"] = std::string(algorithm_name(ctx.algo));
    j["image"] = ctx.image;
    j["run"] = ctx.run;
    j["diverse"] = ctx.diverse;
    j["success"] = r.success;
    j["iterations"] = r.iterations;
    j["epsilon_norm"] = r.eps_norm;
    j["f_final"] = r.f_final;
    j["l2_per_pixel"] = r.l2_per_pixel;
    j["l2"] = lp_norm(r.delta.data(), Norm::L2);
    j["oracle_calls"] = r.oracle_calls;
    j["seed_hex"] = seed_hex(r.seed);
    j["grayscale"] = "bt601";
    j["original_hash"] = ctx.original_hash;
    j["modified_hash"] = ctx.modified_hash;
    j["saved_distance"] = ctx.saved_distance;
    j["config"] = config_json(cfg);
    j["trace"] = r.trace;
    j["eps_trace"] = r.eps_trace;
    return j;
}

Json wb_json(const wb::WbResult& r, const WbContext& ctx) {
    Json j;
    j["attack_kind"] = ctx.kind;
    j["image"] = ctx.image;
    j["success"] = r.success;
    j["k"] = ctx.k;
    j["a"] = ctx.a;
    j["b"] = ctx.b;
    j["threshold"] = ctx.threshold;
    j["delta_norm"] = r.delta_norm;
    j["feature_norm"] = r.feature_norm;
    j["lower_bound"] = wb::theoretical_lower_bound(ctx.threshold);
    j["samples"] = r.samples;
    j["restarts"] = r.restarts;
    j["l2_per_pixel"] = r.delta.data().empty() ? 0.0 : lp_per_pixel(r.delta.data(), Norm::L2);
    j["seed_hex"] = seed_hex(ctx.seed);
    Json cfg;
    if (ctx.kind == "wb_sample") {
        cfg["max_samples"] = ctx.max_samples;
    } else {
        cfg["max_iterations"] = ctx.max_iterations;
        cfg["restarts"] = ctx.restarts;
        cfg["tol_rel"] = wb::kSuccessTolerance;
        j["success_criterion"] = "feature norm within tol_rel of T (row-space optimality)";
    }
    j["config"] = cfg;
    return j;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << text;
        if (!out) throw IoError("write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp + " to " + path.string() + ": " + ec.message());
}

} // namespace hashbreak::report
