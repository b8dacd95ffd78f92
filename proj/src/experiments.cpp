#include "nevgrowth/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace nevgrowth {

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

const char* family_kind_name(FamilyKind k) {
    switch (k) {
        case FamilyKind::pure_power: return "pure-power";
        case FamilyKind::alternating_power: return "alternating-power";
        case FamilyKind::mixed_peaks: return "mixed-peaks";
        case FamilyKind::berezanskii_power: return "berezanskii";
        case FamilyKind::explicit_lists: return "explicit";
    }
    return "?";
}

const char* diagonal_profile_name(DiagonalProfile p) {
    switch (p) {
        case DiagonalProfile::zero: return "zero";
        case DiagonalProfile::constant: return "const";
        case DiagonalProfile::beta: return "beta";
    }
    return "?";
}

void FamilySpec::validate() const {
    auto need = [this](bool ok, const char* what) {
        if (!ok) throw std::domain_error(std::string(family_kind_name(kind)) + ": " + what);
    };
    switch (kind) {
        case FamilyKind::pure_power:
            need(alpha > 1, "needs alpha > 1");
            need(beta > 0, "needs beta > 0");
            break;
        case FamilyKind::alternating_power:
            need(alpha0 > 1 && alpha1 > alpha0, "needs alpha1 > alpha0 > 1");
            break;
        case FamilyKind::mixed_peaks:
            need(alpha > 1 && nu > 1, "needs alpha > 1 and nu > 1");
            need(beta >= 0, "needs beta >= 0");
            need(gamma >= 0 && gamma <= beta, "needs 0 <= gamma <= beta");
            need(mixed_case >= 1 && mixed_case <= 4, "case must be 1, 2, 3 or 4");
            need(mixed_case != 1 || beta > 1, "case 1 needs beta > 1");
            need(mixed_case == 1 || beta <= 1, "cases 2-4 need beta <= 1");
            need(mixed_case != 2 || gamma == beta, "case 2 needs gamma = beta");
            need(mixed_case != 3 || gamma == 0, "case 3 needs gamma = 0");
            need(mixed_case != 1 || gamma == 0, "case 1 has no gamma");
            break;
        case FamilyKind::berezanskii_power:
            need(beta > 1, "needs beta > 1 (sum 1/b_n finite)");
            need(std::isfinite(diagonal_value), "diagonal value must be finite");
            break;
        case FamilyKind::explicit_lists:
            need(lists.has_value() && lists->size() > 0, "needs lengths and angles");
            break;
    }
}

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string canonical_preset_key(const std::string& k) {
    static const std::pair<const char*, const char*> aliases[] = {
        {"\xCE\xB1", "alpha"},     {"\xCE\xB2", "beta"},      {"\xCE\xBD", "nu"},     {"\xCE\xB3", "gamma"},
        {"\xCF\x88", "psi"},       {"\xCE\xB1\xE2\x82\x80", "a0"}, {"\xCE\xB1\xE2\x82\x81", "a1"},
        {"\xCE\xB1" "0", "a0"},    {"\xCE\xB1" "1", "a1"},    {"alpha0", "a0"},       {"alpha1", "a1"},
    };
    for (const auto& [from, to] : aliases)
        if (k == from) return to;
    return lower(k);
}

double parse_number(const std::string& key, const std::string& v) {
    double out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw std::invalid_argument("preset parameter " + key + " has a non-numeric value '" + v + "'");
    return out;
}

}  // namespace

FamilySpec parse_preset(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = lower(text.substr(0, colon));
    FamilySpec s;
    s.preset = text;
    if (name == "pure-power") {
        s.kind = FamilyKind::pure_power;
        s.alpha = 2;
        s.beta = 1;
    } else if (name == "alternating-power") {
        s.kind = FamilyKind::alternating_power;
        s.alpha0 = 2;
        s.alpha1 = 3;
    } else if (name == "mixed-peaks") {
        s.kind = FamilyKind::mixed_peaks;
        s.alpha = 2;
        s.nu = 3;
        s.beta = 0.5;
        s.mixed_case = 3;
    } else if (name == "berezanskii") {
        s.kind = FamilyKind::berezanskii_power;
        s.beta = 2;
    } else if (name == "two-interval") {
        s.kind = FamilyKind::explicit_lists;
        s.lists = HamburgerHamiltonian({1.0, 1.0}, {kPi / 2, 0.0});
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }

    std::optional<double> gamma;
    std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
        const std::size_t comma = rest.find(',', pos);
        const std::string token = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        pos = comma == std::string::npos ? rest.size() : comma + 1;
        if (token.empty()) continue;
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("expected key=value in preset, got '" + token + "'");
        const std::string key = canonical_preset_key(token.substr(0, eq));
        const std::string val = token.substr(eq + 1);
        if (s.kind == FamilyKind::explicit_lists) throw std::invalid_argument("two-interval takes no parameters");
        if (key == "a" && s.kind == FamilyKind::berezanskii_power) {
            const std::string v = lower(val);
            if (v == "zero") s.diagonal = DiagonalProfile::zero;
            else if (v == "const") s.diagonal = DiagonalProfile::constant;
            else if (v == "beta") s.diagonal = DiagonalProfile::beta;
            else throw std::invalid_argument("diagonal profile must be zero, const or beta");
            continue;
        }
        const double x = parse_number(key, val);
        if (key == "alpha" && s.kind != FamilyKind::alternating_power && s.kind != FamilyKind::berezanskii_power) s.alpha = x;
        else if (key == "beta" && s.kind != FamilyKind::alternating_power) s.beta = x;
        else if (key == "a0" && s.kind == FamilyKind::alternating_power) s.alpha0 = x;
        else if (key == "a1" && s.kind == FamilyKind::alternating_power) s.alpha1 = x;
        else if (key == "nu" && s.kind == FamilyKind::mixed_peaks) s.nu = x;
        else if (key == "gamma" && s.kind == FamilyKind::mixed_peaks) gamma = x;
        else if (key == "psi" && s.kind == FamilyKind::mixed_peaks) s.psi = x;
        else if (key == "case" && s.kind == FamilyKind::mixed_peaks) {
            if (x != std::floor(x)) throw std::invalid_argument("case must be an integer");
            s.mixed_case = static_cast<int>(x);
        } else if (key == "t" && s.kind == FamilyKind::berezanskii_power) s.diagonal_value = x;
        else throw std::invalid_argument("preset " + name + " has no parameter '" + key + "'");
    }
    if (s.kind == FamilyKind::mixed_peaks) {
        if (s.mixed_case == 2) s.gamma = gamma.value_or(s.beta);
        else if (s.mixed_case == 4) s.gamma = gamma.value_or(s.beta / 2);
        else s.gamma = gamma.value_or(0);
    }
    s.validate();
    return s;
}

std::string preset_string(const FamilySpec& s) {
    std::string out = family_kind_name(s.kind);
    switch (s.kind) {
        case FamilyKind::pure_power: return out + ":alpha=" + num(s.alpha) + ",beta=" + num(s.beta);
        case FamilyKind::alternating_power: return out + ":a0=" + num(s.alpha0) + ",a1=" + num(s.alpha1);
        case FamilyKind::mixed_peaks:
            return out + ":alpha=" + num(s.alpha) + ",nu=" + num(s.nu) + ",beta=" + num(s.beta) +
                   ",gamma=" + num(s.gamma) + ",psi=" + num(s.psi) + ",case=" + std::to_string(s.mixed_case);
        case FamilyKind::berezanskii_power:
            return out + ":beta=" + num(s.beta) + ",a=" + diagonal_profile_name(s.diagonal) + ",t=" +
                   num(s.diagonal_value);
        case FamilyKind::explicit_lists: return s.preset.empty() ? out : s.preset;
    }
    return out;
}

namespace {

// Angle generators. Both keep the running angle exact up to compensated rounding.
class MonotoneAngles {
public:
    MonotoneAngles(double phi1, double beta) : sum_(phi1), beta_(beta) {}
    // phi_j, then advance by asin(min(1, j^-beta))
    double next(std::size_t j) {
        const double out = sum_;
        const double step = std::asin(std::min(1.0, std::pow(static_cast<double>(j), -beta_)));
        const double y = step - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
        return out;
    }

private:
    double sum_, comp_ = 0, beta_;
};

// Walk with steps j^-beta that turns back whenever it would leave |phi - psi| <= 2 j^-gamma.
class DampedWalk {
public:
    DampedWalk(double psi, double beta, double gamma) : psi_(psi), beta_(beta), gamma_(gamma) {}
    double next(std::size_t j) {
        const double out = psi_ + offset_;
        const double jd = static_cast<double>(j);
        const double step = std::pow(jd, -beta_);
        const double bound = 2 * std::pow(jd + 1, -gamma_);
        if (std::abs(offset_ + sign_ * step) > bound) sign_ = -sign_;
        offset_ = std::clamp(offset_ + sign_ * step, -bound, bound);
        return out;
    }

private:
    double psi_, beta_, gamma_;
    double offset_ = 0, sign_ = 1;
};

class FamilyStream final : public IntervalStream {
public:
    explicit FamilyStream(const FamilySpec& s) : s_(s), mono_(kPi / 2, s.beta), walk_(s.psi, s.beta, s.gamma) {
        if (s.kind == FamilyKind::mixed_peaks) mono_ = MonotoneAngles(s.psi, s.beta);
    }
    bool next(Interval& out) override {
        const std::size_t j = ++j_;
        const double jd = static_cast<double>(j);
        switch (s_.kind) {
            case FamilyKind::pure_power:
                out.length = std::pow(jd, -s_.alpha);
                out.angle = mono_.next(j);
                break;
            case FamilyKind::alternating_power:
                out.length = std::pow(jd, j % 2 == 0 ? -s_.alpha0 : -s_.alpha1);
                out.angle = static_cast<double>(j % 8) * (kPi / 4);
                break;
            case FamilyKind::mixed_peaks: {
                const auto k = static_cast<std::size_t>(std::sqrt(jd));
                const bool square = k * k == j || (k + 1) * (k + 1) == j;
                out.length = std::pow(jd, square ? -s_.nu / 2 : -s_.alpha);
                out.angle = s_.gamma > 0 ? walk_.next(j) : mono_.next(j);
                break;
            }
            default: throw std::logic_error("not a power family");
        }
        return true;
    }

private:
    const FamilySpec& s_;
    std::size_t j_ = 0;
    MonotoneAngles mono_;
    DampedWalk walk_;
};

std::optional<PowerLaw> length_law(const FamilySpec& s) {
    using T = PowerLaw::Term;
    switch (s.kind) {
        case FamilyKind::pure_power: return PowerLaw({T{Support::all, 1, s.alpha}});
        case FamilyKind::alternating_power:
            return PowerLaw({T{Support::even, 1, s.alpha0}, T{Support::odd, 1, s.alpha1}});
        case FamilyKind::mixed_peaks:
            return PowerLaw({T{Support::squares, 1, s.nu / 2}, T{Support::nonsquares, 1, s.alpha}});
        default: return std::nullopt;
    }
}

class FamilySource final : public HamiltonianSource {
public:
    explicit FamilySource(FamilySpec s) : s_(std::move(s)), law_(length_law(s_)) {}
    std::unique_ptr<IntervalStream> open() const override { return std::make_unique<FamilyStream>(s_); }
    std::optional<std::size_t> size() const override { return std::nullopt; }
    std::optional<double> length_tail(std::size_t n) const override { return law_->tail(n); }
    std::string describe() const override { return preset_string(s_); }

private:
    FamilySpec s_;
    std::optional<PowerLaw> law_;
};

class BerezanskiiStream final : public JacobiStream {
public:
    explicit BerezanskiiStream(const FamilySpec& s) : beta_(s.beta), profile_(s.diagonal), t_(s.diagonal_value) {}
    bool next(double& a, double& b) override {
        b = std::pow(static_cast<double>(n_ + 1), beta_);
        switch (profile_) {
            case DiagonalProfile::zero: a = 0; break;
            case DiagonalProfile::constant: a = t_; break;
            case DiagonalProfile::beta: a = -2 * t_ * (n_ == 0 ? b : std::sqrt(b_prev_ * b)); break;
        }
        b_prev_ = b;
        ++n_;
        return true;
    }

private:
    double beta_;
    DiagonalProfile profile_;
    double t_;
    double b_prev_ = 0;
    std::size_t n_ = 0;
};

}  // namespace

std::unique_ptr<JacobiStream> jacobi_stream(const FamilySpec& s) {
    if (s.kind != FamilyKind::berezanskii_power) throw std::invalid_argument("not a Jacobi family");
    return std::make_unique<BerezanskiiStream>(s);
}

std::unique_ptr<HamiltonianSource> make_source(const FamilySpec& s) {
    s.validate();
    switch (s.kind) {
        case FamilyKind::explicit_lists: return std::make_unique<ExplicitSource>(*s.lists);
        case FamilyKind::berezanskii_power:
            return std::make_unique<JacobiHamiltonianSource>([s] { return jacobi_stream(s); }, std::nullopt,
                                                             preset_string(s));
        default: return std::make_unique<FamilySource>(s);
    }
}

HamburgerHamiltonian generate(const FamilySpec& s, std::size_t n) { return make_source(s)->materialize(n); }

JacobiParameters generate_jacobi(const FamilySpec& s, std::size_t n) {
    auto st = jacobi_stream(s);
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) st->next(a[k], b[k]);
    return JacobiParameters(std::move(a), std::move(b));
}

HamiltonianData family_data(const FamilySpec& s, std::size_t n) {
    using T = PowerLaw::Term;
    HamiltonianData d;
    d.h = generate(s, n);
    d.complete = s.kind == FamilyKind::explicit_lists;
    d.length_law = length_law(s);
    switch (s.kind) {
        case FamilyKind::pure_power: d.step_law = PowerLaw({T{Support::all, 1, s.beta}}); break;
        case FamilyKind::alternating_power:
            d.step_law = PowerLaw({T{Support::all, std::sin(kPi / 4), 0}});
            d.drift_law = d.length_law;  // sin^2 <= 1
            d.drift_psi = 0;
            break;
        case FamilyKind::mixed_peaks:
            d.step_law = PowerLaw({T{Support::all, 1, s.beta}});
            if (s.gamma > 0) {
                d.drift_law = PowerLaw({T{Support::squares, 4, s.nu / 2 + 2 * s.gamma},
                                        T{Support::nonsquares, 4, s.alpha + 2 * s.gamma}});
                d.drift_psi = s.psi;
            }
            break;
        default: break;
    }
    return d;
}

namespace {

// Slope of y against log j over log-spaced j in [n/1000, n].
double rate_fit(const std::vector<double>& y) {
    const std::size_t n = y.size();
    std::vector<double> xs, ys;
    const std::size_t lo = std::max<std::size_t>(1, n / 1000);
    std::size_t last = 0;
    for (int k = 0; k <= 300; ++k) {
        const auto j = static_cast<std::size_t>(
            std::llround(static_cast<double>(lo) * std::pow(static_cast<double>(n) / lo, k / 300.0)));
        if (j < 1 || j > n || j == last) continue;
        last = j;
        if (!(y[j - 1] > 0)) continue;
        xs.push_back(static_cast<double>(j));
        ys.push_back(y[j - 1]);
    }
    return -loglog_fit(xs, ys).slope;
}

}  // namespace

AngleValidation validate_angles(const FamilySpec& s, std::size_t n) {
    if (n < 1000) throw std::invalid_argument("validate_angles needs n >= 1000");
    const HamburgerHamiltonian h = generate(s, n + 1);
    AngleValidation v;
    v.n = n;
    v.step_target = s.kind == FamilyKind::alternating_power ? 0 : s.beta;
    v.drift_target = s.kind == FamilyKind::mixed_peaks ? s.gamma : 0;
    std::vector<double> steps(n), drift(n);
    for (std::size_t j = 1; j <= n; ++j) {
        steps[j - 1] = std::abs(std::sin(h.step(j)));
        drift[j - 1] = std::abs(std::sin(h.angle(j) - s.psi));
    }
    for (std::size_t j = n - 1; j-- > 0;) drift[j] = std::max(drift[j], drift[j + 1]);
    v.step_rate = rate_fit(steps);
    v.drift_rate = rate_fit(drift);
    return v;
}

OrderFit order_fit(const HamiltonianSource& src, double r_lo, double r_hi, unsigned per_decade,
                   const TruncationPolicy& policy) {
    if (!(r_lo > 0) || !(r_hi / r_lo >= 100)) throw std::domain_error("order_fit needs r_hi / r_lo >= 100");
    const std::vector<double> grid = geometric_grid(r_lo, r_hi, per_decade);
    if (grid.size() < 10) throw std::domain_error("order_fit needs at least 10 grid points");
    OrderFit fit;
    fit.r_lo = r_lo;
    fit.r_hi = r_hi;
    fit.samples = log_abs_w22_grid(src, grid, policy);
    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        v[k] = fit.samples[k].log_w22;
        fit.flags |= fit.samples[k].flags;
    }
    const LineFit lf = loglog_fit(grid, v);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.residual = lf.residual;
    return fit;
}

namespace {

std::vector<BranchValue> mixed_branch_table(const FamilySpec& s, double gamma) {
    const double a = s.alpha, nu = s.nu, b = s.beta;
    std::vector<BranchValue> t;
    switch (s.mixed_case) {
        case 1:
            t.push_back({"nu>=alpha", 1 / (a + b), nu >= a});
            t.push_back({"nu<alpha", 1 / (nu + b), nu < a});
            break;
        case 2:
            t.push_back({"nu>=alpha", 1 / (a + b), nu >= a});
            t.push_back({"alpha-2beta<=nu<alpha", 1 / ((nu + a) / 2 + b), nu < a && nu >= a - 2 * b});
            t.push_back({"nu<alpha-2beta", 1 / (nu + 2 * b), nu < a - 2 * b});
            break;
        default: {
            const double g = s.mixed_case == 3 ? 0.0 : gamma;
            t.push_back({"nu>=2alpha-1", (a - b + g) / (a * a - b + (a + 1) * g), nu >= 2 * a - 1});
            t.push_back({"alpha<=nu<2alpha-1",
                         (nu + 1 - 2 * b + 2 * g) / ((nu - 1) * (a + 1) + 2 - 2 * b + 2 * (a + 1) * g),
                         nu >= a && nu < 2 * a - 1});
            t.push_back({"nu<alpha", (nu + 1 - 2 * b + 2 * g) / (nu * nu + 1 - 2 * b + 2 * (nu + 1) * g), nu < a});
        }
    }
    return t;
}

MethodSpec method(BoundMethod m, std::vector<std::pair<std::string, double>> p) { return MethodSpec{m, std::move(p)}; }

std::vector<MethodSpec> upper_methods(const FamilySpec& s, double eps) {
    std::vector<MethodSpec> out;
    switch (s.kind) {
        case FamilyKind::pure_power:
            if (s.beta > 1)
                out.push_back(method(BoundMethod::upper_k89, {{"alpha", s.alpha - eps}, {"beta", s.beta - eps}}));
            if (s.beta - eps > 0 && s.beta - eps < 1) {
                out.push_back(method(BoundMethod::upper_k49,
                                     {{"alpha", s.alpha - eps}, {"beta", s.beta - eps}, {"ge", 1}}));
                out.push_back(method(BoundMethod::upper_k49,
                                     {{"alpha", s.alpha - eps}, {"beta", s.beta - eps}, {"ge", 0}}));
            }
            break;
        case FamilyKind::alternating_power:
            out.push_back(method(BoundMethod::upper_k79,
                                 {{"alpha", s.alpha0 - eps}, {"omega", s.alpha0 - eps}, {"psi", 0}}));
            break;
        case FamilyKind::mixed_peaks: {
            const double at = std::min(s.alpha, s.nu) - eps;
            if (s.mixed_case == 1) {
                out.push_back(method(BoundMethod::upper_k89, {{"alpha", at}, {"beta", s.beta - eps}}));
            } else if (s.mixed_case == 2) {
                const double omega = std::min(s.alpha + 2 * s.beta, s.nu + 4 * s.beta) - eps;
                out.push_back(method(BoundMethod::upper_k79, {{"alpha", at}, {"omega", omega}, {"psi", s.psi}}));
            }
            if (s.mixed_case >= 3 && s.beta - eps > 0) {
                std::vector<std::pair<std::string, double>> p{{"alpha", at}, {"beta", s.beta - eps}, {"ge", 1}};
                if (s.mixed_case == 4) p.emplace_back("psi", s.psi);
                out.push_back(method(BoundMethod::upper_k49, p));
            }
            break;
        }
        case FamilyKind::berezanskii_power:
            out.push_back(
                method(BoundMethod::upper_k79, {{"alpha", s.beta - eps}, {"omega", s.beta - eps}, {"psi", 0}}));
            break;
        case FamilyKind::explicit_lists: break;
    }
    out.push_back(method(BoundMethod::upper_k66, {}));
    return out;
}

bool eligible_row(const BoundCurve& c, const LineFit& fit) {
    if (fit.points < 3) return false;
    unsigned bad = kBoundHypothesisViolated | kBoundDegenerate | kBoundLiteralInverse | kBoundOutOfDomain |
                   kBoundTruncationLimited;
    // inverse-based curves change shape, not only their constant, when tails are unknown
    if (c.method == BoundMethod::upper_k66 || c.method == BoundMethod::upper_k49 ||
        c.method == BoundMethod::lower_k4)
        bad |= kBoundTruncationOnly;
    if (c.method == BoundMethod::lower_k4) return false;  // reported, not part of the sandwich
    return !(c.flags & bad);
}

std::string method_label(const BoundCurve& c) {
    std::string out = bound_method_name(c.method);
    bool first = true;
    for (const auto& [k, v] : c.meta) {
        if (k == "lp_lengths" || k == "lp_steps" || k == "lp_drift" || k == "violations" || k == "samples") continue;
        out += first ? ":" : ";";
        out += k + "=" + num(v);
        first = false;
    }
    return out;
}

}  // namespace

SandwichReport sandwich_report(const FamilySpec& s, double r_lo, double r_hi, const SandwichOptions& opt) {
    s.validate();
    SandwichReport rep;
    rep.spec = s;
    rep.per_decade = opt.per_decade;
    const auto src = make_source(s);
    rep.actual = order_fit(*src, r_lo, r_hi, opt.per_decade, opt.policy);
    const std::vector<double> grid = geometric_grid(r_lo, r_hi, opt.per_decade);

    const std::size_t n_bound = s.kind == FamilyKind::explicit_lists ? s.lists->size() : opt.bound_intervals;
    rep.bound_intervals = n_bound;
    const HamiltonianData d = family_data(s, n_bound);

    std::vector<MethodSpec> specs;
    for (double w : {2.0, 3.0, 4.0}) specs.push_back(method(BoundMethod::lower_count, {{"s", w}}));
    specs.push_back(method(BoundMethod::lower_k4, {{"s", 2}}));
    for (auto& m : upper_methods(s, opt.epsilon)) specs.push_back(std::move(m));

    rep.best_upper = 1;
    rep.best_upper_method = "trivial";
    rep.best_lower = 0;
    rep.best_lower_method = "trivial";
    for (const auto& m : specs) {
        SandwichRow row;
        try {
            row.curve = evaluate_bound(d, m, grid, opt.seed);
        } catch (const std::domain_error&) {
            continue;  // parameters outside the method's range for this family
        }
        row.fit = curve_slope(row.curve);
        row.eligible = eligible_row(row.curve, row.fit);
        if (row.eligible) {
            if (is_upper(m.method) && row.fit.slope < rep.best_upper) {
                rep.best_upper = row.fit.slope;
                rep.best_upper_method = method_label(row.curve);
            } else if (!is_upper(m.method) && row.fit.slope > rep.best_lower) {
                rep.best_lower = row.fit.slope;
                rep.best_lower_method = method_label(row.curve);
            }
        }
        rep.rows.push_back(std::move(row));
    }

    OrderBoxParams bp;
    switch (s.kind) {
        case FamilyKind::pure_power:
            bp.alpha0 = s.alpha;
            bp.beta0 = s.beta;
            rep.box_case = s.beta >= 1 ? "k104" : "k74";
            break;
        case FamilyKind::alternating_power:
            bp.alpha0 = s.alpha0;
            bp.omega0 = s.alpha0;
            rep.box_case = "k94";
            break;
        case FamilyKind::mixed_peaks: {
            bp.alpha = s.alpha;
            bp.nu = s.nu;
            bp.beta = s.beta;
            bp.gamma = s.gamma;
            rep.angles = validate_angles(s, std::min<std::size_t>(n_bound, std::size_t{1} << 20));
            // realized drift rate, not the target
            if (s.mixed_case == 2 || s.mixed_case == 4) bp.gamma = std::clamp(rep.angles->drift_rate, 0.0, s.beta);
            rep.box_case = "mixed-peaks-case" + std::to_string(s.mixed_case);
            rep.branch_table = mixed_branch_table(s, bp.gamma);
            break;
        }
        case FamilyKind::berezanskii_power: {
            auto st = jacobi_stream(s);
            rep.berezanskii = berezanskii_check(*st, n_bound);
            OrderBox b;
            b.lower = b.upper = 1 / s.beta;
            b.lower_method = b.upper_method = "convergence-exponent";
            rep.box = b;
            rep.box_case = "berezanskii";
            break;
        }
        case FamilyKind::explicit_lists: break;
    }
    if (s.kind == FamilyKind::pure_power) rep.angles = validate_angles(s, std::min<std::size_t>(n_bound, std::size_t{1} << 20));
    if (!rep.box && !rep.box_case.empty()) rep.box = order_box(rep.box_case, bp);

    rep.lower_ok = rep.best_lower <= rep.actual.slope + rep.tolerance;
    rep.upper_ok = rep.actual.slope <= rep.best_upper + rep.tolerance;
    return rep;
}

namespace {

nlohmann::json spec_json(const FamilySpec& s) {
    nlohmann::json j;
    j["kind"] = family_kind_name(s.kind);
    j["preset"] = preset_string(s);
    switch (s.kind) {
        case FamilyKind::pure_power:
            j["alpha"] = s.alpha;
            j["beta"] = s.beta;
            break;
        case FamilyKind::alternating_power:
            j["alpha0"] = s.alpha0;
            j["alpha1"] = s.alpha1;
            break;
        case FamilyKind::mixed_peaks:
            j["alpha"] = s.alpha;
            j["nu"] = s.nu;
            j["beta"] = s.beta;
            j["gamma"] = s.gamma;
            j["psi"] = s.psi;
            j["case"] = s.mixed_case;
            break;
        case FamilyKind::berezanskii_power:
            j["beta"] = s.beta;
            j["diagonal"] = diagonal_profile_name(s.diagonal);
            j["t"] = s.diagonal_value;
            break;
        case FamilyKind::explicit_lists:
            j["lengths"] = std::vector<double>(s.lists->lengths().begin(), s.lists->lengths().end());
            j["angles"] = std::vector<double>(s.lists->angles().begin(), s.lists->angles().end());
            break;
    }
    return j;
}

nlohmann::json tail_json(const TailDiagnostic& t) {
    return {{"verdict", tail_verdict_name(t.verdict)}, {"n", t.n},
            {"sum", t.sum},
            {"last_decade", t.last_decade},
            {"previous_decade", t.previous_decade},
            {"third_decade", t.third_decade}};
}

}  // namespace

std::string family_json(const FamilySpec& s) { return spec_json(s).dump(2); }

std::string report_json(const SandwichReport& rep) {
    nlohmann::json j;
    j["family"] = spec_json(rep.spec);
    j["r_lo"] = rep.actual.r_lo;
    j["r_hi"] = rep.actual.r_hi;
    j["per_decade"] = rep.per_decade;
    j["bound_intervals"] = rep.bound_intervals;
    std::size_t n_max = 0;
    for (const auto& smp : rep.actual.samples) n_max = std::max(n_max, smp.n_used);
    j["actual"] = {{"slope", rep.actual.slope},
                   {"intercept", rep.actual.intercept},
                   {"residual", rep.actual.residual},
                   {"flags", w22_flag_names(rep.actual.flags)},
                   {"max_intervals_used", n_max}};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : rep.rows) {
        nlohmann::json meta = nlohmann::json::object();
        for (const auto& [k, v] : row.curve.meta) meta[k] = v;
        rows.push_back({{"method", bound_method_name(row.curve.method)},
                        {"label", method_label(row.curve)},
                        {"side", is_upper(row.curve.method) ? "upper" : "lower"},
                        {"slope", row.fit.slope},
                        {"residual", row.fit.residual},
                        {"points", row.fit.points},
                        {"flags", bound_flag_names(row.curve.flags)},
                        {"eligible", row.eligible},
                        {"params", meta}});
    }
    j["bounds"] = rows;
    j["best_lower"] = {{"slope", rep.best_lower}, {"method", rep.best_lower_method}};
    j["best_upper"] = {{"slope", rep.best_upper}, {"method", rep.best_upper_method}};
    if (rep.box)
        j["order_box"] = {{"case", rep.box_case},
                          {"lower", rep.box->lower},
                          {"upper", rep.box->upper},
                          {"lower_method", rep.box->lower_method},
                          {"upper_method", rep.box->upper_method},
                          {"branch", rep.box->branch}};
    if (!rep.branch_table.empty()) {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& b : rep.branch_table) t.push_back({{"branch", b.branch}, {"value", b.value}, {"applies", b.applies}});
        j["branch_table"] = t;
    }
    if (rep.angles)
        j["angle_validation"] = {{"n", rep.angles->n},
                                 {"step_rate", rep.angles->step_rate},
                                 {"step_target", rep.angles->step_target},
                                 {"drift_rate", rep.angles->drift_rate},
                                 {"drift_target", rep.angles->drift_target}};
    if (rep.berezanskii) {
        const auto& b = *rep.berezanskii;
        j["berezanskii"] = {{"verdict", berezanskii_verdict_name(b.verdict)},
                            {"n", b.n},
                            {"inverse_b", tail_json(b.inverse_b)},
                            {"beta_variation", tail_json(b.beta_variation)},
                            {"regularity", tail_json(b.regularity)},
                            {"beta_limit", b.beta_limit},
                            {"beta_spread", b.beta_spread},
                            {"beta_limit_inside", b.beta_limit_inside},
                            {"predicted_order", b.predicted_order.value}};
    }
    j["sandwich"] = {{"tolerance", rep.tolerance},
                     {"lower_ok", rep.lower_ok},
                     {"upper_ok", rep.upper_ok},
                     {"pass", rep.lower_ok && rep.upper_ok}};
    return j.dump(2);
}

std::string report_csv(const SandwichReport& rep) {
    std::string out = "r,logw22,N_used,flags";
    for (const auto& row : rep.rows) out += "," + method_label(row.curve);
    out += ",bound_flags\n";
    for (std::size_t k = 0; k < rep.actual.samples.size(); ++k) {
        const auto& smp = rep.actual.samples[k];
        out += num(smp.r) + "," + num(smp.log_w22) + "," + std::to_string(smp.n_used) + "," +
               w22_flag_names(smp.flags);
        std::string flags;
        for (const auto& row : rep.rows) {
            const auto& b = row.curve.samples[k];
            out += "," + num(b.value);
            if (b.flags) {
                if (!flags.empty()) flags += '|';
                flags += std::string(bound_method_name(row.curve.method)) + "=" + bound_flag_names(b.flags);
            }
        }
        out += "," + flags + "\n";
    }
    return out;
}

}  // namespace nevgrowth
