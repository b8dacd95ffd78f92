// Command-line front end over the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "nevgrowth.h"

namespace {

struct ApiError {
    ng_status status;
    std::string message;
};

void check(ng_status s) {
    if (s != NG_OK) throw ApiError{s, ng_last_error()};
}

// Owns a string returned by the library.
struct Text {
    char* p = nullptr;
    ~Text() { ng_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct Model {
    ng_model* p = nullptr;
    ~Model() { ng_model_free(p); }
};

std::string read_input(const std::string& path) {
    if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& data) {
    if (path.empty() || path == "-") {
        std::cout << data;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output '" + path + "'");
    out << data;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

struct Common {
    std::string input, preset, out, format = "csv";
    double r_lo = 1e4, r_hi = 1e8;
    unsigned per_decade = 20, threads = 1;
    unsigned long long seed = 1;
    std::size_t bound_intervals = std::size_t{1} << 20;

    ng_grid grid() const { return ng_grid{r_lo, r_hi, per_decade}; }
    ng_options options() const {
        ng_options o;
        ng_options_default(&o);
        o.threads = threads;
        o.seed = seed;
        o.bound_intervals = bound_intervals;
        return o;
    }
    ng_format fmt() const { return format == "json" ? NG_FORMAT_JSON : NG_FORMAT_CSV; }

    void load(Model& m) const {
        if (input.empty() == preset.empty()) throw std::runtime_error("give exactly one of --input and --preset");
        if (!input.empty())
            check(ng_model_from_json(read_input(input).c_str(), &m.p));
        else
            check(ng_model_from_preset(preset.c_str(), &m.p));
    }
};

void add_source(CLI::App* app, Common& c) {
    app->add_option("--input", c.input, "Hamiltonian or Jacobi JSON file ('-' for stdin)");
    app->add_option("--preset", c.preset, "family preset, e.g. alternating-power:a0=2,a1=3");
}

void add_grid(CLI::App* app, Common& c) {
    app->add_option("--r-lo", c.r_lo, "smallest r")->check(CLI::PositiveNumber);
    app->add_option("--r-hi", c.r_hi, "largest r")->check(CLI::PositiveNumber);
    app->add_option("--per-decade", c.per_decade, "grid points per decade")->check(CLI::Range(1u, 1000u));
    app->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

void add_output(CLI::App* app, Common& c) {
    app->add_option("--out", c.out, "output path (default stdout)");
    app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Growth of canonical-system monodromy matrices: evaluation, bounds and experiments"};
    app.require_subcommand(1);
    Common c;

    auto* convert = app.add_subcommand("convert", "Jacobi parameters {a, b} to Hamiltonian {lengths, angles}");
    convert->add_option("--input", c.input, "Jacobi JSON file ('-' for stdin)")->required();
    convert->add_option("--out", c.out, "output path (default stdout)");

    auto* eval = app.add_subcommand("eval", "log|w22(ir)| on a geometric r-grid");
    add_source(eval, c);
    add_grid(eval, c);
    add_output(eval, c);

    std::string methods;
    auto* bounds = app.add_subcommand("bounds", "lower and upper bound curves");
    add_source(bounds, c);
    add_grid(bounds, c);
    add_output(bounds, c);
    bounds->add_option("--methods", methods, "e.g. lower-count:s=2,upper-k89:alpha=2,beta=1")->required();
    bounds->add_option("--seed", c.seed, "seed for sampled hypothesis checks");
    bounds->add_option("--bound-intervals", c.bound_intervals, "stored truncation for preset families");

    auto* experiment = app.add_subcommand("experiment", "sandwich report of a preset family");
    experiment->add_option("--preset", c.preset, "family preset")->required();
    add_grid(experiment, c);
    experiment->add_option("--out", c.out, "output prefix; writes PREFIX.json and PREFIX.csv")->required();
    experiment->add_option("--seed", c.seed, "seed for sampled hypothesis checks");
    experiment->add_option("--bound-intervals", c.bound_intervals, "stored truncation for bound curves");

    std::size_t n = 0;
    std::string exp_method = "counting-slope";
    std::string values_path;
    auto* exponents = app.add_subcommand("exponents", "convergence exponents of b^(s) or of a given sequence");
    add_source(exponents, c);
    exponents->add_option("--values", values_path, "JSON array of positive values");
    exponents->add_option("--n", n, "truncation (required for presets)");
    exponents->add_option("--method", exp_method, "ratio-limsup or counting-slope")
        ->check(CLI::IsMember({"ratio-limsup", "counting-slope"}));
    exponents->add_option("--out", c.out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*convert) {
            Text out;
            double err = 0;
            check(ng_convert_jacobi(read_input(c.input).c_str(), &out.p, &err));
            write_output(c.out, out.str() + "\n");
            std::fprintf(stderr, "round-trip max relative error: %.3e\n", err);
        } else if (*eval) {
            Model m;
            c.load(m);
            const ng_grid g = c.grid();
            const ng_options o = c.options();
            Text out;
            check(ng_eval(m.p, &g, &o, c.fmt(), &out.p));
            write_output(c.out, out.str());
        } else if (*bounds) {
            Model m;
            c.load(m);
            const ng_grid g = c.grid();
            const ng_options o = c.options();
            Text out;
            check(ng_bounds(m.p, methods.c_str(), &g, &o, c.fmt(), &out.p));
            write_output(c.out, out.str());
        } else if (*experiment) {
            const ng_grid g = c.grid();
            const ng_options o = c.options();
            Text report, curves;
            check(ng_experiment(c.preset.c_str(), &g, &o, &report.p, &curves.p));
            write_output(c.out + ".json", report.str());
            write_output(c.out + ".csv", curves.str());
            std::fprintf(stderr, "wrote %s.json and %s.csv\n", c.out.c_str(), c.out.c_str());
        } else if (*exponents) {
            Text out;
            if (!values_path.empty()) {
                const auto doc = nlohmann::json::parse(read_input(values_path));
                const auto& arr = doc.is_object() ? doc.at("values") : doc;
                const std::vector<double> v = arr.get<std::vector<double>>();
                double e = 0;
                check(ng_sequence_exponent(v.data(), v.size(), exp_method.c_str(), &e));
                nlohmann::json j{{"n", v.size()}, {"method", exp_method}, {"value", e}};
                write_output(c.out, j.dump(2) + "\n");
            } else {
                Model m;
                c.load(m);
                check(ng_model_exponents(m.p, n, exp_method.c_str(), &out.p));
                write_output(c.out, out.str());
            }
        }
    } catch (const ApiError& e) {
        std::fprintf(stderr, "nevgrowth: %s: %s\n", ng_status_name(e.status), e.message.c_str());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "nevgrowth: %s\n", e.what());
        return 1;
    }
    return 0;
}
