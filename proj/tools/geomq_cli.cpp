#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "geomq.h"

namespace {

using Json = nlohmann::ordered_json;

struct Flags {
    std::string mode;
    std::string chart;
    std::string at;
    double delta = 0.0;
    std::string deltas;
    int nev = 0;
    std::string grid;
    uint64_t seed = 0;
    std::string suite;
    double R = 0.0;
    int lmax = 0;
    bool timings = false;
    bool diagonal = false;
    std::string config_path;
    std::string out;
    std::string format;

    CLI::Option* o_chart = nullptr;
    CLI::Option* o_at = nullptr;
    CLI::Option* o_delta = nullptr;
    CLI::Option* o_deltas = nullptr;
    CLI::Option* o_nev = nullptr;
    CLI::Option* o_grid = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_suite = nullptr;
    CLI::Option* o_R = nullptr;
    CLI::Option* o_lmax = nullptr;
    CLI::Option* o_timings = nullptr;
    CLI::Option* o_diagonal = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_format = nullptr;
};

void add_common(CLI::App* sub, Flags& f) {
    f.o_chart = sub->add_option("--chart", f.chart, "chart spec, NAME:key=value,...");
    f.o_at = sub->add_option("--at", f.at, "parameter point, comma-separated");
    f.o_delta = sub->add_option("--delta", f.delta, "layer half-width");
    f.o_deltas = sub->add_option("--deltas", f.deltas, "half-width list, comma-separated");
    f.o_nev = sub->add_option("--nev", f.nev, "number of eigenvalues");
    f.o_grid = sub->add_option("--grid", f.grid, "grid sizes N or N,M");
    f.o_seed = sub->add_option("--seed", f.seed, "suite seed (64-bit unsigned)");
    f.o_suite = sub->add_option("--suite", f.suite, "randomized suite name, e.g. random20");
    f.o_R = sub->add_option("--R", f.R, "radius for shell / sphere checks");
    f.o_lmax = sub->add_option("--lmax", f.lmax, "largest angular mode");
    f.o_timings = sub->add_flag("--timings", f.timings, "record wall-clock per check");
    f.o_diagonal = sub->add_flag("--diagonal", f.diagonal, "restrict detexp to diagonal forms");
    sub->add_option("--config", f.config_path, "JSON config file; flags override its keys");
    f.o_out = sub->add_option("--out", f.out, "output file (written atomically)");
    f.o_format = sub->add_option("--format", f.format, "output format: json or csv")
                     ->check(CLI::IsMember({"json", "csv"}));
}

std::vector<double> parse_csv_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<int> parse_csv_ints(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_csv_doubles(text)) {
        if (v != double(int(v))) throw std::invalid_argument("grid sizes must be integers");
        out.push_back(int(v));
    }
    return out;
}

int run(const std::string& command, const Flags& f) {
    Json cfg = Json::object();
    if (!f.config_path.empty()) {
        std::ifstream is(f.config_path);
        if (!is) {
            std::fprintf(stderr, "error: cannot read config file '%s'\n", f.config_path.c_str());
            return 2;
        }
        std::stringstream buf;
        buf << is.rdbuf();
        try {
            cfg = Json::parse(buf.str());
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: config file is not valid JSON: %s\n", e.what());
            return 2;
        }
        if (!cfg.is_object()) {
            std::fprintf(stderr, "error: config file must hold a JSON object\n");
            return 2;
        }
    }

    cfg["command"] = command;
    if (!f.mode.empty()) cfg["mode"] = f.mode;
    try {
        if (f.o_chart->count()) cfg["chart"] = f.chart;
        if (f.o_at->count()) cfg["at"] = parse_csv_doubles(f.at);
        if (f.o_delta->count()) cfg["delta"] = f.delta;
        if (f.o_deltas->count()) cfg["deltas"] = parse_csv_doubles(f.deltas);
        if (f.o_nev->count()) cfg["nev"] = f.nev;
        if (f.o_grid->count()) cfg["grid"] = parse_csv_ints(f.grid);
        if (f.o_seed->count()) cfg["seed"] = f.seed;
        if (f.o_suite->count()) cfg["suite"] = f.suite;
        if (f.o_R->count()) cfg["R"] = f.R;
        if (f.o_lmax->count()) cfg["lmax"] = f.lmax;
        if (f.o_timings->count()) cfg["timings"] = true;
        if (f.o_diagonal->count()) cfg["diagonal"] = true;
        if (f.o_out->count()) cfg["out"] = f.out;
        if (f.o_format->count()) cfg["format"] = f.format;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    char* output = nullptr;
    int pass = 0;
    geomq_status st = geomq_run(cfg.dump().c_str(), &output, &pass);
    if (st != GEOMQ_OK) {
        std::fprintf(stderr, "error: %s (%s)\n", geomq_last_error(), geomq_status_name(st));
        return 2;
    }
    if (f.out.empty()) {
        std::fputs(output, stdout);
    } else {
        std::fprintf(stderr, "%s report written to %s\n", pass ? "passing" : "FAILING",
                     f.out.c_str());
    }
    geomq_string_free(output);
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("geomq ") + geomq_version() +
                 ": curvature, quantum potentials, and thin-layer spectra"};
    app.require_subcommand(1);

    Flags fc, fp, fv, fs;
    auto* curvature =
        app.add_subcommand("curvature", "principal curvatures / curvature forms at points");
    add_common(curvature, fc);
    auto* potential = app.add_subcommand("potential", "quantum potential along every path");
    add_common(potential, fp);
    auto* verify = app.add_subcommand("verify", "verification suites over the adapted expansions");
    verify->add_option("mode", fv.mode, "prokhorov | divn | series | detexp | stereo | vqpaths")
        ->required();
    add_common(verify, fv);
    auto* spectrum = app.add_subcommand("spectrum", "surface / layer / shell spectra and sweeps");
    spectrum->add_option("mode", fs.mode, "surface | layer | shell | sweep | factorization")
        ->required();
    add_common(spectrum, fs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (curvature->parsed()) return run("curvature", fc);
    if (potential->parsed()) return run("potential", fp);
    if (verify->parsed()) return run("verify", fv);
    return run("spectrum", fs);
}
