#include "nevgrowth.h"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "nevgrowth/bounds.hpp"
#include "nevgrowth/experiments.hpp"
#include "nevgrowth/exponents.hpp"
#include "nevgrowth/jacobi.hpp"
#include "nevgrowth/monodromy.hpp"

using namespace nevgrowth;
using nlohmann::json;

struct ng_model {
    FamilySpec spec;
    std::optional<JacobiParameters> jacobi;
};

namespace {

thread_local std::string g_last_error;

ng_status fail(ng_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

// Runs f, mapping exceptions to status codes and recording the message.
template <class F>
ng_status guarded(F&& f) {
    try {
        g_last_error.clear();
        f();
        return NG_OK;
    } catch (const json::parse_error& e) {
        return fail(NG_ERR_PARSE, e.what());
    } catch (const json::exception& e) {
        return fail(NG_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::domain_error& e) {
        return fail(NG_ERR_DOMAIN, e.what());
    } catch (const std::logic_error& e) {
        return fail(NG_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::runtime_error& e) {
        return fail(NG_ERR_DEGENERATE, e.what());
    } catch (const std::exception& e) {
        return fail(NG_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(NG_ERR_INTERNAL, "unknown error");
    }
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void need(const void* p, const char* what) {
    if (!p) throw std::invalid_argument(std::string(what) + " is null");
}

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<double> numbers(const json& doc, const char* key) {
    if (!doc.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
    const json& arr = doc.at(key);
    if (!arr.is_array()) throw std::invalid_argument(std::string("field '") + key + "' must be an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw std::invalid_argument(std::string("field '") + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

JacobiParameters jacobi_from_json(const json& doc) { return JacobiParameters(numbers(doc, "a"), numbers(doc, "b")); }

json hamiltonian_to_json(const HamburgerHamiltonian& h) {
    return {{"lengths", std::vector<double>(h.lengths().begin(), h.lengths().end())},
            {"angles", std::vector<double>(h.angles().begin(), h.angles().end())}};
}

TruncationPolicy policy_of(const ng_options* opt) {
    TruncationPolicy p;
    if (!opt) return p;
    p.threads = opt->threads;
    if (opt->rel_tol > 0) p.rel_tol = opt->rel_tol;
    if (opt->max_intervals > 0) p.max_intervals = opt->max_intervals;
    return p;
}

ng_options options_or_default(const ng_options* opt) {
    ng_options o;
    ng_options_default(&o);
    return opt ? *opt : o;
}

std::vector<double> grid_of(const ng_grid* g) {
    need(g, "grid");
    return geometric_grid(g->r_lo, g->r_hi, g->per_decade);
}

bool is_explicit(const ng_model* m) { return m->spec.kind == FamilyKind::explicit_lists; }

}  // namespace

extern "C" {

void ng_options_default(ng_options* out) {
    if (!out) return;
    out->threads = 1;
    out->seed = 1;
    out->bound_intervals = std::size_t{1} << 20;
    out->rel_tol = 1e-3;
    out->max_intervals = std::size_t{1} << 25;
}

const char* ng_last_error(void) { return g_last_error.c_str(); }

const char* ng_status_name(ng_status s) {
    switch (s) {
        case NG_OK: return "ok";
        case NG_ERR_INVALID_ARGUMENT: return "invalid argument";
        case NG_ERR_DOMAIN: return "parameter out of range";
        case NG_ERR_PARSE: return "parse error";
        case NG_ERR_DEGENERATE: return "numerical degeneracy";
        case NG_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void ng_string_free(char* s) { std::free(s); }

ng_status ng_model_from_json(const char* text, ng_model** out) {
    return guarded([&] {
        need(text, "json");
        need(out, "out");
        *out = nullptr;
        const json doc = json::parse(text);
        if (!doc.is_object()) throw std::invalid_argument("expected a JSON object");
        auto m = std::make_unique<ng_model>();
        m->spec.kind = FamilyKind::explicit_lists;
        if (doc.contains("lengths") || doc.contains("angles")) {
            m->spec.lists = HamburgerHamiltonian(numbers(doc, "lengths"), numbers(doc, "angles"));
        } else if (doc.contains("a") || doc.contains("b")) {
            m->jacobi = jacobi_from_json(doc);
            m->spec.lists = jacobi_to_hamiltonian(*m->jacobi);
            m->spec.preset = "jacobi";
        } else {
            throw std::invalid_argument("expected fields lengths/angles or a/b");
        }
        m->spec.validate();
        *out = m.release();
    });
}

ng_status ng_model_from_lists(const double* lengths, const double* angles, size_t n, ng_model** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        if (n > 0) {
            need(lengths, "lengths");
            need(angles, "angles");
        }
        auto m = std::make_unique<ng_model>();
        m->spec.kind = FamilyKind::explicit_lists;
        m->spec.lists = HamburgerHamiltonian(std::vector<double>(lengths, lengths + n), std::vector<double>(angles, angles + n));
        m->spec.validate();
        *out = m.release();
    });
}

ng_status ng_model_from_preset(const char* preset, ng_model** out) {
    return guarded([&] {
        need(preset, "preset");
        need(out, "out");
        *out = nullptr;
        auto m = std::make_unique<ng_model>();
        m->spec = parse_preset(preset);
        *out = m.release();
    });
}

void ng_model_free(ng_model* m) { delete m; }

size_t ng_model_size(const ng_model* m) {
    if (!m || !is_explicit(m)) return 0;
    return m->spec.lists->size();
}

ng_status ng_model_describe(const ng_model* m, char** out) {
    return guarded([&] {
        need(m, "model");
        need(out, "out");
        *out = dup(family_json(m->spec));
    });
}

ng_status ng_model_hamiltonian_json(const ng_model* m, size_t n, char** out) {
    return guarded([&] {
        need(m, "model");
        need(out, "out");
        if (is_explicit(m)) {
            const auto& h = *m->spec.lists;
            const std::size_t k = n == 0 ? h.size() : std::min(n, h.size());
            *out = dup(hamiltonian_to_json(make_source(m->spec)->materialize(k)).dump());
        } else {
            if (n == 0) throw std::invalid_argument("an unbounded family needs a truncation n > 0");
            *out = dup(hamiltonian_to_json(generate(m->spec, n)).dump());
        }
    });
}

ng_status ng_convert_jacobi(const char* jacobi_json, char** hamiltonian_json, double* round_trip_error) {
    return guarded([&] {
        need(jacobi_json, "json");
        need(hamiltonian_json, "out");
        const JacobiParameters j = jacobi_from_json(json::parse(jacobi_json));
        const HamburgerHamiltonian h = jacobi_to_hamiltonian(j);
        const double err = j.size() >= 2 ? bridge_round_trip_error(j) : 0.0;
        *hamiltonian_json = dup(hamiltonian_to_json(h).dump());
        if (round_trip_error) *round_trip_error = err;
    });
}

ng_status ng_log_abs_w22(const ng_model* m, double r, double* out) {
    return guarded([&] {
        need(m, "model");
        need(out, "out");
        if (is_explicit(m)) {
            *out = log_abs_w22(*m->spec.lists, r);
        } else {
            const double grid[1] = {r};
            *out = log_abs_w22_grid(*make_source(m->spec), grid).front().log_w22;
        }
    });
}

ng_status ng_eval(const ng_model* m, const ng_grid* g, const ng_options* opt, ng_format fmt, char** out) {
    return guarded([&] {
        need(m, "model");
        need(out, "out");
        const std::vector<double> grid = grid_of(g);
        const auto samples = log_abs_w22_grid(*make_source(m->spec), grid, policy_of(opt));
        if (fmt == NG_FORMAT_JSON) {
            json rows = json::array();
            for (const auto& s : samples)
                rows.push_back({{"r", s.r},
                                {"logw22", s.log_w22},
                                {"N_used", s.n_used},
                                {"flags", w22_flag_names(s.flags)},
                                {"tail_ratio", s.tail_ratio}});
            *out = dup(json{{"family", json::parse(family_json(m->spec))}, {"samples", rows}}.dump(2) + "\n");
            return;
        }
        std::string csv = "r,logw22,N_used,flags\n";
        for (const auto& s : samples)
            csv += num(s.r) + "," + num(s.log_w22) + "," + std::to_string(s.n_used) + "," + w22_flag_names(s.flags) + "\n";
        *out = dup(csv);
    });
}

ng_status ng_bounds(const ng_model* m, const char* methods, const ng_grid* g, const ng_options* opt, ng_format fmt,
                    char** out) {
    return guarded([&] {
        need(m, "model");
        need(methods, "methods");
        need(out, "out");
        const ng_options o = options_or_default(opt);
        const std::vector<MethodSpec> specs = parse_method_list(methods);
        const std::vector<double> grid = grid_of(g);
        const HamiltonianData d =
            family_data(m->spec, is_explicit(m) ? m->spec.lists->size() : o.bound_intervals);
        std::vector<BoundCurve> curves;
        for (const auto& s : specs) curves.push_back(evaluate_bound(d, s, grid, o.seed));

        auto label = [](const BoundCurve& c) {
            std::string l = bound_method_name(c.method);
            bool first = true;
            for (const auto& [k, v] : c.meta) {
                if (k == "lp_lengths" || k == "lp_steps" || k == "lp_drift" || k == "violations" || k == "samples")
                    continue;
                l += first ? ":" : ";";
                l += k + "=" + num(v);
                first = false;
            }
            return l;
        };
        if (fmt == NG_FORMAT_JSON) {
            json arr = json::array();
            for (const auto& c : curves) {
                json samples = json::array();
                for (const auto& s : c.samples)
                    samples.push_back({{"r", s.r}, {"value", s.value}, {"flags", bound_flag_names(s.flags)}});
                json meta = json::object();
                for (const auto& [k, v] : c.meta) meta[k] = v;
                const LineFit fit = curve_slope(c);
                arr.push_back({{"method", bound_method_name(c.method)},
                               {"label", label(c)},
                               {"params", meta},
                               {"flags", bound_flag_names(c.flags)},
                               {"slope", fit.slope},
                               {"samples", samples}});
            }
            *out = dup(json{{"family", json::parse(family_json(m->spec))}, {"curves", arr}}.dump(2) + "\n");
            return;
        }
        std::string csv = "r";
        for (const auto& c : curves) csv += "," + label(c);
        csv += ",flags\n";
        for (std::size_t k = 0; k < grid.size(); ++k) {
            csv += num(grid[k]);
            std::string flags;
            for (const auto& c : curves) {
                csv += "," + num(c.samples[k].value);
                if (c.samples[k].flags) {
                    if (!flags.empty()) flags += '|';
                    flags += std::string(bound_method_name(c.method)) + "=" + bound_flag_names(c.samples[k].flags);
                }
            }
            csv += "," + flags + "\n";
        }
        *out = dup(csv);
    });
}

ng_status ng_experiment(const char* preset, const ng_grid* g, const ng_options* opt, char** report_json_out,
                        char** curves_csv) {
    return guarded([&] {
        need(preset, "preset");
        need(g, "grid");
        const ng_options o = options_or_default(opt);
        SandwichOptions so;
        so.per_decade = g->per_decade;
        so.bound_intervals = o.bound_intervals;
        so.policy = policy_of(&o);
        so.seed = o.seed;
        const SandwichReport rep = sandwich_report(parse_preset(preset), g->r_lo, g->r_hi, so);
        if (report_json_out) *report_json_out = dup(report_json(rep) + "\n");
        if (curves_csv) *curves_csv = dup(report_csv(rep));
    });
}

ng_status ng_sequence_exponent(const double* values, size_t n, const char* method, double* out) {
    return guarded([&] {
        need(values, "values");
        need(out, "out");
        const auto m = parse_exponent_method(method ? method : "counting-slope");
        if (!m) throw std::invalid_argument(std::string("unknown exponent method '") + method + "'");
        *out = convergence_exponent(std::span<const double>(values, n), *m).value;
    });
}

ng_status ng_model_exponents(const ng_model* m, size_t n, const char* method, char** out) {
    return guarded([&] {
        need(m, "model");
        need(out, "out");
        const auto em = parse_exponent_method(method ? method : "counting-slope");
        if (!em) throw std::invalid_argument(std::string("unknown exponent method '") + method + "'");
        HamburgerHamiltonian h;
        if (is_explicit(m)) {
            const std::size_t size = m->spec.lists->size();
            h = make_source(m->spec)->materialize(n == 0 ? size : std::min(n, size));
        } else {
            if (n == 0) throw std::invalid_argument("an unbounded family needs a truncation n > 0");
            h = generate(m->spec, n);
        }
        json seqs = json::array();
        for (std::size_t s = 2; s <= 4; ++s) {
            const ExponentEstimate e = convergence_exponent(b_s_sequence(h, s), *em);
            seqs.push_back({{"sequence", "b" + std::to_string(s)},
                            {"value", e.value},
                            {"window_lo", e.window_lo},
                            {"window_hi", e.window_hi},
                            {"residual", e.residual},
                            {"cutoff", e.cutoff}});
        }
        if (m->jacobi) {
            const ExponentEstimate e = convergence_exponent(m->jacobi->b, *em);
            seqs.push_back({{"sequence", "jacobi-b"}, {"value", e.value}, {"residual", e.residual}});
        }
        *out = dup(json{{"n", h.size()}, {"method", exponent_method_name(*em)}, {"exponents", seqs}}.dump(2) + "\n");
    });
}

}  // extern "C"
