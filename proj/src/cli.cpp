#include "carlab/cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "carlab/carleman.hpp"
#include "carlab/gridops.hpp"
#include "carlab/parallel.hpp"
#include "carlab/symbolcheck.hpp"
#include "carlab/treves.hpp"

namespace carlab::cli {

using nlohmann::json;

namespace {

std::size_t workers_of(const RunConfig& c) { return c.workers == 0 ? default_workers() : c.workers; }

template <class T>
T field(const json& j, const std::string& where, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + key + ": wrong type");
    }
}

const json& section(const json& j, const char* key) {
    static const json empty = json::object();
    if (!j.is_object() || !j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw ConfigError(std::string(key) + ": expected an object");
    return j.at(key);
}

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

void check_counts(const std::vector<std::size_t>& counts, const std::string& what) {
    for (std::size_t c : counts)
        if (c < grid::kMinPoints || !is_power_of_two(c))
            throw ConfigError(what + ": grid counts must be powers of two >= 16");
}

void check_mn(int m, int n) {
    if (m < 1) throw ConfigError("m: must be >= 1");
    if (n < 1) throw ConfigError("n: must be >= 1");
}

std::uint64_t seed_of(const RunConfig& c, std::uint64_t fallback = 1) {
    if (c.seed) return *c.seed;
    return field<std::uint64_t>(c.config, "", "seed", fallback);
}

// --- treves-verify ----------------------------------------------------------------

json resolve_treves(const RunConfig& c) {
    const std::string preset = field<std::string>(c.config, "", "preset", "random");
    if (preset != "random" && preset != "zero") throw ConfigError("preset: must be random or zero");
    const auto dims = field<std::vector<std::size_t>>(c.config, "", "dimensions", {1, 2});
    for (auto d : dims)
        if (d != 1 && d != 2) throw ConfigError("dimensions: entries must be 1 or 2");
    const int max_degree = field<int>(c.config, "", "max_degree", 4);
    if (max_degree < 1) throw ConfigError("max_degree: must be >= 1");
    const auto cases = field<std::size_t>(c.config, "", "seeds", 20);
    if (cases < 1) throw ConfigError("seeds: must be >= 1");
    const double tol = field<double>(c.config, "", "tolerance", preset == "zero" ? 1e-10 : 1e-7);
    if (!(tol > 0.0)) throw ConfigError("tolerance: must be positive");
    return {{"preset", preset},   {"dimensions", dims}, {"max_degree", max_degree},
            {"seeds", cases},     {"tolerance", tol},   {"seed", seed_of(c)}};
}

RunResult run_treves(const json& cfg) {
    const bool zero = cfg["preset"] == "zero";
    const auto seed = cfg["seed"].get<std::uint64_t>();
    const double tol = cfg["tolerance"];
    RunResult r;
    json cases = json::array();
    double worst = 0.0;
    for (std::size_t d : cfg["dimensions"].get<std::vector<std::size_t>>()) {
        for (std::size_t i = 0; i < cfg["seeds"].get<std::size_t>(); ++i) {
            const auto tc = treves::random_treves_case(seed + i, d, cfg["max_degree"], zero);
            const auto rep = treves::verify_treves(tc.p, tc.q, tc.u);
            worst = std::max(worst, rep.relative_error);
            cases.push_back({{"dimension", d},
                             {"seed", seed + i},
                             {"degree", tc.p.degree()},
                             {"a", tc.q.a},
                             {"b", tc.q.b},
                             {"lhs", rep.lhs},
                             {"rhs", rep.rhs},
                             {"relative_error", rep.relative_error}});
        }
    }
    r.pass = worst <= tol;
    r.report = {{"cases", cases}, {"relative_error", worst}, {"pass", r.pass}};
    return r;
}

// --- lemma22 -----------------------------------------------------------------------

json resolve_lemma22(const RunConfig& c) {
    const auto dim = field<std::size_t>(c.config, "", "dimension", 1);
    if (dim != 1 && dim != 2) throw ConfigError("dimension: must be 1 or 2");
    const int degree = field<int>(c.config, "", "max_degree", 3);
    const int k = field<int>(c.config, "", "k", 1);
    if (degree < 1) throw ConfigError("max_degree: must be >= 1");
    if (k < 0) throw ConfigError("k: must be >= 0");
    const auto polys = field<std::size_t>(c.config, "", "polynomials", 5);
    const auto family = field<std::size_t>(c.config, "", "family", 8);
    if (polys < 1 || family < 1) throw ConfigError("polynomials/family: must be >= 1");
    json out{{"dimension", dim}, {"max_degree", degree}, {"k", k},
             {"polynomials", polys}, {"family", family}, {"seed", seed_of(c)}};
    if (c.config.contains("b")) {
        const auto b = field<std::vector<double>>(c.config, "", "b", {});
        if (b.size() != dim) throw ConfigError("b: length must equal dimension");
        for (double v : b)
            if (v < 0.0) throw ConfigError("b: entries must be >= 0");
        out["b"] = b;
    }
    return out;
}

RunResult run_lemma22(const json& cfg) {
    const auto seed = cfg["seed"].get<std::uint64_t>();
    const auto dim = cfg["dimension"].get<std::size_t>();
    std::vector<grid::GridFunction> family;
    for (std::size_t j = 0; j < cfg["family"].get<std::size_t>(); ++j)
        family.push_back(treves::random_treves_case(seed * 7919 + j, dim, 1, true).u);
    RunResult r;
    r.pass = true;
    json rows = json::array();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < cfg["polynomials"].get<std::size_t>(); ++i) {
        const int degree = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg["max_degree"].get<int>()));
        const poly::Polynomial p = treves::random_polynomial(rng, dim, degree);
        grid::QuadraticWeight q = grid::QuadraticWeight::zero(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            q.a[j] = 4.0 * unit(rng) - 2.0;
            q.b[j] = cfg.contains("b") ? cfg["b"][j].get<double>() : 2.0 * unit(rng);
        }
        const auto rep = treves::estimate_lemma22(p, q, cfg["k"], family, seed);
        r.pass = r.pass && rep.pass;
        json row = rep.to_json();
        row["polynomial"] = p.to_json();
        row["a"] = q.a;
        row["b"] = q.b;
        rows.push_back(row);
    }
    r.report = {{"results", rows}, {"pass", r.pass}};
    return r;
}

// --- lemma23 -----------------------------------------------------------------------

json resolve_lemma23(const RunConfig& c) {
    const auto ks = field<std::vector<int>>(c.config, "", "K", {1, 2, 3, 4});
    const auto taus = field<std::vector<double>>(c.config, "", "tau", {2.0, 10.0, 50.0});
    const double delta = field<double>(c.config, "", "delta", 0.3);
    const auto family = field<std::size_t>(c.config, "", "family", 8);
    const auto points = field<std::size_t>(c.config, "", "points", 512);
    for (int k : ks)
        if (k < 1) throw ConfigError("K: entries must be >= 1");
    for (double t : taus)
        if (!(t > 1.0)) throw ConfigError("tau: entries must exceed tau0 = 1");
    if (!(delta > 0.0) || delta > 0.5) throw ConfigError("delta: must lie in (0, 0.5]");
    if (family < 1) throw ConfigError("family: must be >= 1");
    check_counts({points}, "points");
    return {{"K", ks}, {"tau", taus}, {"delta", delta},
            {"family", family}, {"points", points}, {"seed", seed_of(c)}};
}

RunResult run_lemma23(const json& cfg) {
    const auto family = treves::bump_family_1d(cfg["seed"], cfg["family"], cfg["points"]);
    RunResult r;
    r.pass = true;
    json rows = json::array();
    for (int k : cfg["K"].get<std::vector<int>>())
        for (double tau : cfg["tau"].get<std::vector<double>>())
            for (auto sign : {poly::Sign::plus, poly::Sign::minus}) {
                treves::Lemma23Params prm;
                prm.k = k;
                prm.tau = tau;
                prm.delta = cfg["delta"];
                prm.sign = sign;
                const auto rep = treves::verify_lemma23(prm, family);
                r.pass = r.pass && rep.pass_23 && rep.pass_24;
                rows.push_back(rep.to_json());
            }
    r.report = {{"results", rows}, {"pass", r.pass}};
    return r;
}

// --- factorization / ellipticity -------------------------------------------------------

json resolve_factorization(const RunConfig& c) {
    std::vector<int> ms{1, 2, 3}, ns{1, 2, 3};
    if (c.m) ms = {*c.m};
    if (c.n) ns = {*c.n};
    for (int m : ms)
        for (int n : ns) check_mn(m, n);
    return {{"m", ms}, {"n", ns}};
}

RunResult run_factorization(const json& cfg) {
    RunResult r;
    r.pass = true;
    json rows = json::array();
    for (int m : cfg["m"].get<std::vector<int>>())
        for (int n : cfg["n"].get<std::vector<int>>()) {
            const auto rep = symbol::verify_factorization(m, n);
            r.pass = r.pass && rep.pass;
            rows.push_back(rep.to_json());
        }
    r.report = {{"results", rows}, {"pass", r.pass}};
    return r;
}

json resolve_ellipticity(const RunConfig& c) {
    const int m = c.m.value_or(field<int>(c.config, "", "m", 1));
    const int n = c.n.value_or(field<int>(c.config, "", "n", 1));
    check_mn(m, n);
    const std::size_t samples = c.samples.value_or(field<std::size_t>(c.config, "", "samples", 20000));
    if (samples < symbol::kMinSphereSamples) throw ConfigError("samples: must be >= 10000");
    const auto trials = field<std::size_t>(c.config, "", "trials", 100000);
    return {{"m", m}, {"n", n}, {"samples", samples}, {"trials", trials}, {"seed", seed_of(c)}};
}

RunResult run_ellipticity(const json& cfg, std::size_t workers) {
    const int m = cfg["m"];
    const int n = cfg["n"];
    const std::size_t samples = cfg["samples"];
    const std::uint64_t seed = cfg["seed"];
    const auto lhs = symbol::lhs_form_39(m, n);
    const auto rhs = symbol::rhs_form_39(m, n);
    const auto base = symbol::min_ratio_on_sphere(lhs, rhs, samples, seed, workers);
    const auto refined = symbol::min_ratio_on_sphere(lhs, rhs, 4 * samples, seed, workers);
    const double change =
        std::abs(refined.min_value - base.min_value) / std::max(std::abs(base.min_value), 1e-300);

    const symbol::HomogeneousForm one([](std::span<const double>) { return 1.0; }, 0, m, n);
    const auto rhs_only = symbol::min_ratio_on_sphere(rhs, one, samples, seed, workers);
    // min over s in [0,1] of s^{2m} + (1-s)^{2m}
    const double rhs_closed = std::pow(2.0, 1 - 2 * m);
    const bool rhs_ok = std::abs(rhs_only.min_value - rhs_closed) <= 1e-6;

    const auto check = symbol::check_38_from_39(m, n, cfg["trials"], base.min_value, seed);

    RunResult r;
    r.pass = base.min_value > 0.0 && change <= 0.01 && rhs_ok && check.pass;
    r.report = {{"min_value", base.min_value},
                {"sphere", base.to_json()},
                {"refined", refined.to_json()},
                {"refinement_change", change},
                {"rhs_only_min", rhs_only.min_value},
                {"rhs_only_closed_form", rhs_closed},
                {"rhs_only_pass", rhs_ok},
                {"monte_carlo", check.to_json()},
                {"pass", r.pass}};
    return r;
}

// --- carleman-sweep ---------------------------------------------------------------------

std::vector<std::size_t> default_counts(int n) {
    if (n == 1) return {256, 256};
    std::vector<std::size_t> c(static_cast<std::size_t>(n) + 1, 64);
    c.front() = 128;
    c.back() = 128;
    return c;
}

json resolve_sweep(const RunConfig& c) {
    const json& op = section(c.config, "operator");
    const json& wt = section(c.config, "weight");
    const json& sp = section(c.config, "spec");
    const json& tau = section(c.config, "tau");

    const std::string kind = field<std::string>(op, "operator.", "kind", "parabolic");
    if (kind != "parabolic" && kind != "schrodinger")
        throw ConfigError("operator.kind: must be parabolic or schrodinger");
    const int m = c.m.value_or(field<int>(op, "operator.", "m", 1));
    const int n = c.n.value_or(field<int>(op, "operator.", "n", 1));
    check_mn(m, n);

    const double dp = field<double>(sp, "spec.", "delta_prime", 0.2);
    if (!(dp > 0.0) || !(dp < 1.0)) throw ConfigError("spec.delta_prime: must lie in (0, 1)");
    if (kind == "schrodinger" && !(dp < 0.5))
        throw ConfigError("spec.delta_prime: Schrodinger sweeps require delta_prime < 1/2");
    const int bumps = field<int>(sp, "spec.", "bumps", 3);
    if (bumps < 1) throw ConfigError("spec.bumps: must be >= 1");
    const auto count = field<std::size_t>(sp, "spec.", "count", 16);
    if (count < 1) throw ConfigError("spec.count: must be >= 1");
    const double modulation = field<double>(sp, "spec.", "modulation", 0.25);
    if (modulation < 0.0 || modulation > 1.0) throw ConfigError("spec.modulation: must lie in [0, 1]");
    std::vector<std::uint64_t> seeds;
    if (c.seed) {
        seeds = {*c.seed};
    } else if (sp.contains("seeds")) {
        seeds = field<std::vector<std::uint64_t>>(sp, "spec.", "seeds", {});
    } else {
        seeds = {field<std::uint64_t>(sp, "spec.", "seed", 1)};
    }
    if (seeds.empty()) throw ConfigError("spec.seeds: need at least one seed");

    const std::string wkind = field<std::string>(wt, "weight.", "kind", "standard");
    if (wkind != "standard" && wkind != "saddle") throw ConfigError("weight.kind: must be standard or saddle");
    double big_n = 0.0;
    if (wt.contains("N") && wt.at("N").is_string()) {
        if (wt.at("N") != "preset") throw ConfigError("weight.N: must be a number or \"preset\"");
        big_n = carleman::time_confinement_preset(dp, dp);
    } else {
        big_n = field<double>(wt, "weight.", "N", 0.0);
    }
    if (!(big_n >= 0.0)) throw ConfigError("weight.N: must be >= 0");
    std::optional<double> sc;
    if (wkind == "saddle") {
        sc = field<double>(wt, "weight.", "c", 1.0);
        if (!(*sc > 0.0)) throw ConfigError("weight.c: saddle weight requires c > 0");
    }
    const auto w = carleman::make_weight(carleman::weight_kind_from_string(wkind), big_n, sc);

    const auto counts = field<std::vector<std::size_t>>(c.config, "", "grid", default_counts(n));
    if (counts.size() != static_cast<std::size_t>(n) + 1)
        throw ConfigError("grid: need 1 + n counts");
    check_counts(counts, "grid");

    carleman::TestFunctionSpec spec;
    spec.delta_prime = dp;
    spec.n = n;
    const auto g = carleman::make_grid(spec, counts);
    const double guard = carleman::kMaxWeightExponent / carleman::max_abs_two_phi(w, spec);
    const double tmin = field<double>(tau, "tau.", "min", 2.0);
    const double tmax = field<double>(tau, "tau.", "max", carleman::default_tau_max(w, spec, g));
    const auto points = field<std::size_t>(tau, "tau.", "points", 20);
    if (!(tmin > 0.0)) throw ConfigError("tau.min: must be positive");
    if (!(tmin < tmax)) throw ConfigError("tau: min must be smaller than max");
    if (points < 1) throw ConfigError("tau.points: must be >= 1");
    if (tmax > guard)
        throw ConfigError("tau.max: tau_max * max|2 phi| exceeds 1200; lower tau.max below " +
                          std::to_string(guard));

    const double cap = field<double>(c.config, "", "cap_factor", 10.0);
    if (!(cap > 0.0)) throw ConfigError("cap_factor: must be positive");
    const bool renormalize = field<bool>(c.config, "", "renormalize", true);

    return {{"operator", {{"kind", kind}, {"m", m}, {"n", n}}},
            {"weight", {{"kind", wkind}, {"N", big_n}, {"c", sc.value_or(0.0)}}},
            {"spec",
             {{"delta_prime", dp}, {"bumps", bumps}, {"seeds", seeds}, {"count", count},
              {"modulation", modulation}}},
            {"tau", {{"min", tmin}, {"max", tmax}, {"points", points}}},
            {"grid", counts},
            {"cap_factor", cap},
            {"renormalize", renormalize}};
}

RunResult run_sweep(const json& cfg, std::size_t workers) {
    const int m = cfg["operator"]["m"];
    const int n = cfg["operator"]["n"];
    const auto op = cfg["operator"]["kind"] == "parabolic" ? carleman::OperatorSymbol::parabolic(m, n)
                                                          : carleman::OperatorSymbol::schrodinger(m, n);
    const auto& wc = cfg["weight"];
    const auto wkind = carleman::weight_kind_from_string(wc["kind"]);
    const auto w = carleman::make_weight(
        wkind, wc["N"], wkind == carleman::WeightKind::saddle ? std::optional<double>(wc["c"]) : std::nullopt);

    carleman::TestFunctionSpec spec;
    spec.delta_prime = cfg["spec"]["delta_prime"];
    spec.n = n;
    spec.bump_count = cfg["spec"]["bumps"];
    spec.modulation_fraction = cfg["spec"]["modulation"];
    const auto seeds = cfg["spec"]["seeds"].get<std::vector<std::uint64_t>>();
    spec.seed = seeds.front();
    const auto g = carleman::make_grid(spec, cfg["grid"].get<std::vector<std::size_t>>());

    std::vector<carleman::MemberDensities> members;
    for (auto s : seeds) {
        auto sp = spec;
        sp.seed = s;
        const auto family = carleman::generate_family(sp, g, cfg["spec"]["count"]);
        auto part = carleman::member_densities(family, op, workers);
        for (auto& p : part) members.push_back(std::move(p));
    }
    const auto taus = carleman::log_spaced(cfg["tau"]["min"], cfg["tau"]["max"], cfg["tau"]["points"]);
    carleman::SweepOptions opts;
    opts.cap_factor = cfg["cap_factor"];
    opts.workers = workers;
    opts.renormalize = cfg["renormalize"];
    const auto rep = carleman::sweep(w, spec, members, taus, opts);

    RunResult r;
    bool finite = true;
    for (const auto& p : rep.points) finite = finite && !p.degenerate && std::isfinite(p.c_star);
    r.pass = finite && carleman::bounded_growth(rep);
    r.report = rep.to_json();
    r.report["pass"] = r.pass;
    r.csv = rep.to_csv();
    return r;
}

json resolve(const RunConfig& c) {
    if (c.command == "treves-verify") return resolve_treves(c);
    if (c.command == "lemma22") return resolve_lemma22(c);
    if (c.command == "lemma23") return resolve_lemma23(c);
    if (c.command == "factorization") return resolve_factorization(c);
    if (c.command == "ellipticity") return resolve_ellipticity(c);
    if (c.command == "carleman-sweep") return resolve_sweep(c);
    throw ConfigError("command: unknown subcommand '" + c.command + "'");
}

}  // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> list{"treves-verify", "lemma22",     "lemma23",
                                               "factorization", "ellipticity", "carleman-sweep"};
    return list;
}

void validate(const RunConfig& config) {
    if (!config.config.is_object()) throw ConfigError("config: expected a JSON object");
    resolve(config);
}

RunResult execute(const RunConfig& config) {
    validate(config);
    const json cfg = resolve(config);
    const std::size_t workers = workers_of(config);
    RunResult r;
    if (config.command == "treves-verify") r = run_treves(cfg);
    else if (config.command == "lemma22") r = run_lemma22(cfg);
    else if (config.command == "lemma23") r = run_lemma23(cfg);
    else if (config.command == "factorization") r = run_factorization(cfg);
    else if (config.command == "ellipticity") r = run_ellipticity(cfg, workers);
    else r = run_sweep(cfg, workers);
    json report{{"command", config.command}, {"config", cfg}, {"pass", r.pass}};
    report["result"] = std::move(r.report);
    r.report = std::move(report);
    return r;
}

std::string render(const json& report) { return report.dump(2) + "\n"; }

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    RunResult r;
    try {
        r = execute(config);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    const auto json_path = config.out_dir / (config.command + ".json");
    std::ofstream(json_path, std::ios::binary) << render(r.report);
    if (!r.csv.empty()) std::ofstream(config.out_dir / (config.command + ".csv"), std::ios::binary) << r.csv;
    out << config.command << ": " << (r.pass ? "PASS" : "FAIL") << " -> " << json_path.string() << "\n";
    return r.pass ? 0 : 1;
}

}  // namespace carlab::cli
