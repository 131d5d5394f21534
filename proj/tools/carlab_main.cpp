#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "carlab/cli.hpp"

namespace {

struct Flags {
    std::string config_path;
    std::optional<int> m;
    std::optional<int> n;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 0;
    std::string out = ".";
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config_path, "JSON configuration file");
    sub->add_option("--out", f.out, "Output directory for reports");
    sub->add_option("--seed", f.seed, "RNG seed (overrides the config)");
    sub->add_option("--workers", f.workers, "Worker threads (0: all cores)");
}

std::string describe(const std::string& name) {
    static const std::map<std::string, std::string> text{
        {"treves-verify", "Weighted identity on random polynomials and bumps"},
        {"lemma22", "Curvature quotient constant over a bump family"},
        {"lemma23", "Pointwise bounds for conjugated powers of D_s"},
        {"factorization", "Symbolic factorization of |xi|^{2m} derivatives"},
        {"ellipticity", "Minimum of the symbol quotient on the sphere"},
        {"carleman-sweep", "C*(tau) sweep of the weighted estimate over a family"},
    };
    const auto it = text.find(name);
    return it == text.end() ? std::string() : it->second;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"carlab: verification runs for weighted estimates of parabolic and Schrodinger operators"};
    app.require_subcommand(1);
    Flags f;
    for (const auto& name : carlab::cli::commands()) {
        auto* sub = app.add_subcommand(name, describe(name));
        add_common(sub, f);
        if (name == "factorization" || name == "ellipticity" || name == "carleman-sweep") {
            sub->add_option("--m", f.m, "Order parameter m");
            sub->add_option("--n", f.n, "Spatial dimension n");
        }
        if (name == "ellipticity") sub->add_option("--samples", f.samples, "Sphere samples");
    }
    CLI11_PARSE(app, argc, argv);

    auto* sub = app.get_subcommands().front();
    carlab::cli::RunConfig cfg;
    cfg.command = sub->get_name();
    cfg.out_dir = f.out;
    cfg.workers = f.workers;
    cfg.seed = f.seed;
    cfg.m = f.m;
    cfg.n = f.n;
    cfg.samples = f.samples;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) {
            std::cerr << "error: cannot open config file " << f.config_path << "\n";
            return 2;
        }
        try {
            cfg.config = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
            return 2;
        }
    }
    return carlab::cli::run(cfg, std::cout, std::cerr);
}
