#include "nevgrowth/bounds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "numeric_util.hpp"

namespace nevgrowth {

const char* bound_method_name(BoundMethod m) {
    switch (m) {
        case BoundMethod::lower_count: return "lower-count";
        case BoundMethod::lower_k4: return "lower-k4";
        case BoundMethod::upper_k26: return "upper-k26";
        case BoundMethod::upper_k89: return "upper-k89";
        case BoundMethod::upper_k66: return "upper-k66";
        case BoundMethod::upper_k79: return "upper-k79";
        case BoundMethod::upper_k49: return "upper-k49";
        case BoundMethod::upper_holder: return "upper-holder";
    }
    return "?";
}

std::optional<BoundMethod> parse_bound_method(const std::string& name) {
    for (BoundMethod m : {BoundMethod::lower_count, BoundMethod::lower_k4, BoundMethod::upper_k26,
                          BoundMethod::upper_k89, BoundMethod::upper_k66, BoundMethod::upper_k79,
                          BoundMethod::upper_k49, BoundMethod::upper_holder})
        if (name == bound_method_name(m)) return m;
    return std::nullopt;
}

bool is_upper(BoundMethod m) { return m != BoundMethod::lower_count && m != BoundMethod::lower_k4; }

std::string bound_flag_names(unsigned flags) {
    static const std::pair<unsigned, const char*> names[] = {
        {kBoundTruncationLimited, "truncation-limited"},
        {kBoundTruncationOnly, "truncation-only"},
        {kBoundEmptySet, "empty-set-convention"},
        {kBoundHypothesisViolated, "hypothesis-violated"},
        {kBoundDegenerate, "degenerate"},
        {kBoundLiteralInverse, "literal-inverse"},
        {kBoundGeInverse, "ge-inverse"},
        {kBoundOutOfDomain, "r-out-of-domain"},
        {kBoundDriftTailBounded, "drift-tail-bounded"},
    };
    std::string out;
    for (const auto& [bit, name] : names) {
        if (!(flags & bit)) continue;
        if (!out.empty()) out += ';';
        out += name;
    }
    return out;
}

namespace {

void check_grid(std::span<const double> r) {
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (!(r[k] > 0) || !std::isfinite(r[k])) throw std::domain_error("r values must be positive and finite");
        if (k > 0 && !(r[k] > r[k - 1])) throw std::domain_error("r values must be strictly increasing");
    }
}

std::vector<double> suffix_sums(std::span<const double> v) {
    std::vector<double> out(v.size() + 1, 0.0);
    detail::NeumaierSum acc;
    for (std::size_t j = v.size(); j-- > 0;) {
        acc.add(v[j]);
        out[j] = acc.value();
    }
    return out;
}

bool same_direction(double a, double b) { return std::abs(std::sin(a - b)) < 1e-15; }

// Tail sums of lengths, angle steps and drift terms, stored part plus closed forms.
class Tails {
public:
    Tails(const HamiltonianData& d, std::optional<double> psi) : d_(d), psi_(psi) {
        const auto& h = d.h;
        const std::size_t m = h.size();
        len_ = suffix_sums(h.lengths());
        std::vector<double> steps(m > 0 ? m - 1 : 0);
        for (std::size_t j = 1; j < m; ++j) steps[j - 1] = std::abs(std::sin(h.step(j)));
        step_ = suffix_sums(steps);
        if (psi) {
            std::vector<double> drift(m);
            for (std::size_t j = 1; j <= m; ++j) {
                const double s = std::sin(h.angle(j) - *psi);
                drift[j - 1] = h.length(j) * s * s;
            }
            drift_ = suffix_sums(drift);
        }
        drift_law_ok_ = psi && d.drift_law && same_direction(*psi, d.drift_psi);
    }

    std::size_t size() const { return d_.h.size(); }
    bool unbounded_search() const { return !d_.complete && d_.length_law.has_value(); }
    unsigned flags() const { return flags_; }

    // sum_{j>n} l_j
    double length(std::size_t n) {
        const std::size_t m = size();
        if (n < m) return len_[n] + length_beyond(m);
        return length_beyond(n);
    }
    // sum_{j>n} |sin(phi_{j+1} - phi_j)|
    double step(std::size_t n) {
        const std::size_t m = size();
        const std::size_t last = m > 0 ? m - 1 : 0;  // steps stored for j = 1..m-1
        double beyond;
        if (d_.complete) {
            beyond = 0;
        } else if (d_.step_law) {
            beyond = d_.step_law->tail(std::max(n, last));
            if (!std::isfinite(beyond)) flags_ |= kBoundHypothesisViolated;
        } else {
            beyond = 0;
            flags_ |= kBoundTruncationOnly;
        }
        return (n < last ? step_[n] : 0.0) + beyond;
    }
    // sum_{j>n} l_j sin^2(phi_j - psi); the length tail when no psi is set
    double drift(std::size_t n) {
        if (!psi_) return length(n);
        const std::size_t m = size();
        const std::size_t from = std::max(n, m);
        double beyond = 0;
        if (!d_.complete) {
            if (drift_law_ok_) {
                beyond = d_.drift_law->tail(from);
            } else {
                beyond = length_beyond(from);
                flags_ |= kBoundDriftTailBounded;
            }
        }
        return (n < m ? drift_[n] : 0.0) + beyond;
    }

private:
    double length_beyond(std::size_t n) {
        if (d_.complete) return 0;
        if (d_.length_law) {
            const double t = d_.length_law->tail(n);
            if (!std::isfinite(t)) flags_ |= kBoundHypothesisViolated;
            return t;
        }
        flags_ |= kBoundTruncationOnly;
        return 0;
    }

    const HamiltonianData& d_;
    std::optional<double> psi_;
    std::vector<double> len_, step_, drift_;
    bool drift_law_ok_ = false;
    unsigned flags_ = 0;
};

// log sum_j v_j^p over stored values plus the closed-form remainder of law^p beyond `from`.
double log_lp_total(std::span<const double> stored, double p, const HamiltonianData& d,
                    const std::optional<PowerLaw>& law, std::size_t from, unsigned& flags) {
    const LpSum s = lp_sum(stored, p);
    double beyond = 0;
    if (!d.complete) {
        if (law) {
            beyond = law->pow(p).tail(from);
            if (!std::isfinite(beyond)) {
                flags |= kBoundHypothesisViolated;
                beyond = 0;
            }
        } else {
            flags |= kBoundTruncationOnly;
        }
    }
    if (beyond == 0) return s.log_value;
    if (!std::isfinite(s.log_value)) return std::log(beyond);
    const double hi = std::max(s.log_value, std::log(beyond));
    return hi + std::log(std::exp(s.log_value - hi) + std::exp(std::log(beyond) - hi));
}

BoundCurve make_curve(BoundMethod m, std::span<const double> r) {
    check_grid(r);
    BoundCurve c;
    c.method = m;
    c.samples.resize(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) c.samples[k].r = r[k];
    return c;
}

void finish(BoundCurve& c, unsigned curve_flags) {
    c.flags |= curve_flags;
    for (auto& s : c.samples) {
        s.flags |= curve_flags;
        c.flags |= s.flags;
    }
}

// Power curves exp(log_const) r^exponent.
void fill_power(BoundCurve& c, double exponent, double log_const) {
    for (auto& s : c.samples) s.value = std::exp(log_const + exponent * std::log(s.r));
}

std::vector<double> steps_of(const HamburgerHamiltonian& h) {
    std::vector<double> out(h.size() > 0 ? h.size() - 1 : 0);
    for (std::size_t j = 1; j < h.size(); ++j) out[j - 1] = std::abs(std::sin(h.step(j)));
    return out;
}

}  // namespace

BoundCurve lower_count_curve(const HamiltonianData& d, std::size_t s, std::span<const double> r) {
    BoundCurve c = make_curve(BoundMethod::lower_count, r);
    c.meta = {{"s", static_cast<double>(s)}};
    const std::vector<double> b = b_s_sequence(d.h, s);
    double cutoff = std::numeric_limits<double>::infinity();
    if (!d.complete && !b.empty()) {
        const std::size_t last = b.size() - std::max<std::size_t>(1, b.size() / 10);
        cutoff = *std::min_element(b.begin() + static_cast<std::ptrdiff_t>(last), b.end());
    }
    std::vector<double> sorted = b;
    std::sort(sorted.begin(), sorted.end());
    for (auto& smp : c.samples) {
        const auto count = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), smp.r) - sorted.begin());
        smp.value = static_cast<double>(count / s);
        if (smp.r > cutoff) smp.flags |= kBoundTruncationLimited;
    }
    finish(c, 0);
    return c;
}

BoundCurve lower_k4_curve(const HamiltonianData& d, std::size_t s, std::span<const double> r) {
    BoundCurve c = make_curve(BoundMethod::lower_k4, r);
    c.meta = {{"s", static_cast<double>(s)}};
    const std::vector<double> f = window_sqrt_det(d.h, s);
    const std::vector<double> tail = suffix_sums(f);
    // suffix maxima, nonincreasing; the last j with f_j > t is the last j with suffix max > t
    std::vector<double> smax(f.size());
    double run = 0;
    for (std::size_t j = f.size(); j-- > 0;) {
        run = std::max(run, f[j]);
        smax[j] = run;
    }
    for (auto& smp : c.samples) {
        const double t = 1.0 / smp.r;
        const auto it = std::partition_point(smax.begin(), smax.end(), [t](double v) { return v > t; });
        std::size_t h;
        if (it == smax.begin()) {
            h = 0;
            smp.flags |= kBoundEmptySet;
        } else {
            h = static_cast<std::size_t>(it - smax.begin());  // 1 + last index with f_j > t
        }
        smp.value = smp.r / static_cast<double>(s) * tail[h];
    }
    finish(c, d.complete ? 0u : unsigned(kBoundTruncationOnly));
    return c;
}

namespace {

struct PairSampler {
    std::mt19937_64 rng;
    std::size_t m;
    PairSampler(std::uint64_t seed, std::size_t m) : rng(seed), m(m) {}
    // 0 <= a < b <= m with b - a log-uniform in [1, m]
    std::pair<std::size_t, std::size_t> next() {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        auto w = static_cast<std::size_t>(std::exp(u(rng) * std::log(static_cast<double>(m))));
        w = std::clamp<std::size_t>(w, 1, m);
        std::uniform_int_distribution<std::size_t> start(0, m - w);
        const std::size_t a = start(rng);
        return {a, a + w};
    }
};

}  // namespace

BoundCurve upper_k26_curve(const HamiltonianData& d, const K26Params& p, std::span<const double> r) {
    BoundCurve c = make_curve(BoundMethod::upper_k26, r);
    c.meta = {{"nu", p.nu}, {"gamma", p.gamma}, {"delta", p.delta}, {"K", p.k}, {"samples", double(p.samples)}};
    if (!(p.nu > 0) || !(p.k > 0) || !(p.gamma > 0) || !(p.delta > 0) || std::abs(p.gamma + p.delta - 1) > 1e-12)
        throw std::domain_error("upper-k26 needs nu, K, gamma, delta > 0 with gamma + delta = 1");
    const std::size_t m = d.h.size();
    if (p.f.size() != m + 1 || p.g.size() != m + 1)
        throw std::invalid_argument("upper-k26 sequences must have one entry per node");
    unsigned flags = 0;
    std::size_t violations = 0;
    if (m >= 2) {
        PairSampler sampler(p.seed, m);
        for (std::size_t k = 0; k < p.samples; ++k) {
            const auto [a, b] = sampler.next();
            const double lhs = std::pow(det_omega_nodes(d.h, a, b), p.nu);
            const double rhs = p.k * std::pow(std::max(0.0, p.f[b] - p.f[a]), p.gamma) *
                               std::pow(std::max(0.0, p.g[b] - p.g[a]), p.delta);
            if (lhs > rhs * (1 + 1e-9)) ++violations;
        }
    }
    if (violations) flags |= kBoundHypothesisViolated;
    c.meta.emplace_back("violations", static_cast<double>(violations));
    const double df = p.f_limit - p.f.front(), dg = p.g_limit - p.g.front();
    if (!(df > 0) || !(dg > 0)) flags |= kBoundDegenerate;
    const double log_const = std::log(p.k / p.nu) + p.gamma * std::log(std::max(df, 0.0)) +
                             p.delta * std::log(std::max(dg, 0.0));
    fill_power(c, 2 * p.nu, log_const);
    finish(c, flags);
    return c;
}

BoundCurve upper_k89_curve(const HamiltonianData& d, double alpha, double beta, std::span<const double> r) {
    if (!(alpha >= 1) || !(beta >= 1)) throw std::domain_error("upper-k89 needs alpha >= 1 and beta >= 1");
    BoundCurve c = make_curve(BoundMethod::upper_k89, r);
    c.meta = {{"alpha", alpha}, {"beta", beta}};
    unsigned flags = 0;
    const std::size_t m = d.h.size();
    const double log_l = log_lp_total(d.h.lengths(), 1 / alpha, d, d.length_law, m, flags);
    const std::vector<double> steps = steps_of(d.h);
    const double log_s = log_lp_total(steps, 1 / beta, d, d.step_law, m > 0 ? m - 1 : 0, flags);
    const double ab = alpha + beta;
    const double log_1ps = std::isfinite(log_s) ? std::log1p(std::exp(log_s)) : 0.0;
    const double log_const = std::log(2 * ab) + alpha / ab * log_l + beta / ab * log_1ps;
    c.meta.emplace_back("lp_lengths", std::exp(log_l));
    c.meta.emplace_back("lp_steps", std::exp(log_s));
    fill_power(c, 1 / ab, log_const);
    finish(c, flags);
    return c;
}

BoundCurve upper_k66_curve(const HamiltonianData& d, std::span<const double> r) {
    BoundCurve c = make_curve(BoundMethod::upper_k66, r);
    Tails tails(d, std::nullopt);
    const std::size_t n_max = tails.unbounded_search() ? (std::size_t{1} << 50) : std::max<std::size_t>(1, d.h.size());
    auto g = [&](std::size_t n) {
        return std::sqrt(tails.length(n)) * std::sqrt(tails.step(n)) / static_cast<double>(n);
    };
    for (auto& smp : c.samples) {
        const double lr = std::log(smp.r);
        if (!(lr > 0)) {
            smp.flags |= kBoundOutOfDomain;
            smp.value = 0;
            continue;
        }
        const double x = lr / std::sqrt(smp.r);
        // G is nonincreasing: first N with G(N) < x
        std::size_t lo = 1, hi = n_max;
        if (!(g(hi) < x)) {
            smp.flags |= kBoundTruncationLimited;
            smp.value = static_cast<double>(hi) * lr;
            continue;
        }
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (g(mid) < x)
                hi = mid;
            else
                lo = mid + 1;
        }
        smp.value = static_cast<double>(lo) * lr;
    }
    finish(c, tails.flags());
    return c;
}

BoundCurve upper_k79_curve(const HamiltonianData& d, double alpha, double omega, double psi,
                           std::span<const double> r) {
    if (!(alpha >= 1) || !(omega >= 1)) throw std::domain_error("upper-k79 needs alpha >= 1 and omega >= 1");
    BoundCurve c = make_curve(BoundMethod::upper_k79, r);
    c.meta = {{"alpha", alpha}, {"omega", omega}, {"psi", psi}};
    unsigned flags = 0;
    const std::size_t m = d.h.size();
    const double log_l = log_lp_total(d.h.lengths(), 1 / alpha, d, d.length_law, m, flags);
    std::vector<double> drift(m);
    for (std::size_t j = 1; j <= m; ++j) {
        const double s = std::sin(d.h.angle(j) - psi);
        drift[j - 1] = d.h.length(j) * s * s;
    }
    double log_w;
    if (!d.complete && !(d.drift_law && same_direction(psi, d.drift_psi)) && d.length_law) {
        // (l sin^2)^{1/w} <= l^{1/w} beyond the truncation
        log_w = log_lp_total(drift, 1 / omega, d, d.length_law, m, flags);
        flags |= kBoundDriftTailBounded;
    } else {
        const std::optional<PowerLaw> law =
            d.drift_law && same_direction(psi, d.drift_psi) ? d.drift_law : std::optional<PowerLaw>{};
        log_w = log_lp_total(drift, 1 / omega, d, law, m, flags);
    }
    c.meta.emplace_back("lp_lengths", std::exp(log_l));
    c.meta.emplace_back("lp_drift", std::exp(log_w));
    const double aw = alpha + omega;
    if (!std::isfinite(log_w)) {
        flags |= kBoundDegenerate;
        for (auto& s : c.samples) s.value = 0;
    } else {
        fill_power(c, 2 / aw, std::log(aw) + alpha / aw * log_l + omega / aw * log_w);
    }
    finish(c, flags);
    return c;
}

BoundCurve upper_k49_curve(const HamiltonianData& d, double alpha, double beta, std::optional<double> psi,
                           bool ge_inverse, std::span<const double> r) {
    if (!(alpha >= 1) || !(beta > 0 && beta < 1))
        throw std::domain_error("upper-k49 needs alpha >= 1 and 0 < beta < 1");
    BoundCurve c = make_curve(BoundMethod::upper_k49, r);
    c.meta = {{"alpha", alpha}, {"beta", beta}, {"ge", ge_inverse ? 1.0 : 0.0}};
    if (psi) c.meta.emplace_back("psi", *psi);
    Tails tails(d, psi);
    const std::size_t n_max = tails.unbounded_search() ? (std::size_t{1} << 50) : std::max<std::size_t>(1, d.h.size());
    const double e1 = (1 - beta) / alpha, e2 = -(alpha + 1) / (2 * alpha);
    // log F(N); +inf once the tails vanish
    auto log_f = [&](std::size_t n) {
        const double t = tails.length(n) * tails.drift(n);
        if (!(t > 0)) return std::numeric_limits<double>::infinity();
        return e1 * std::log(static_cast<double>(n)) + e2 * std::log(t);
    };
    unsigned flags = ge_inverse ? kBoundGeInverse : kBoundLiteralInverse;
    for (auto& smp : c.samples) {
        const double lr = std::log(smp.r);
        std::size_t n_inv = 0;
        if (ge_inverse) {
            // F is increasing: first N with F(N) >= r
            if (log_f(n_max) < lr) {
                smp.flags |= kBoundTruncationLimited;
                n_inv = n_max;
            } else {
                std::size_t lo = 1, hi = n_max;
                while (lo < hi) {
                    const std::size_t mid = lo + (hi - lo) / 2;
                    if (log_f(mid) >= lr)
                        hi = mid;
                    else
                        lo = mid + 1;
                }
                n_inv = lo;
            }
        } else {
            // first N with F(N) < r; for increasing F this is 1 or nothing
            std::size_t n = 1;
            const std::size_t scan = std::min<std::size_t>(n_max, 1u << 20);
            while (n <= scan && !(log_f(n) < lr)) ++n;
            if (n > scan) {
                smp.flags |= kBoundTruncationLimited;
                n = scan;
            }
            n_inv = n;
        }
        smp.value = std::exp((lr + (1 - beta) * std::log(static_cast<double>(n_inv))) / (alpha + 1));
    }
    finish(c, flags | tails.flags());
    return c;
}

BoundCurve upper_holder_curve(const HamiltonianData& d, double alpha, std::optional<double> dc,
                              std::span<const double> r, std::uint64_t seed) {
    if (!(alpha > 0)) throw std::domain_error("upper-holder needs alpha > 0");
    const std::size_t m = d.h.size();
    const auto nodes = d.h.nodes();
    unsigned extra = 0;
    double dval;
    if (dc) {
        if (!(*dc > 0)) throw std::domain_error("upper-holder needs d > 0");
        dval = *dc;
    } else {
        // smallest d over sampled pairs m < n of |phi_{m+1} - phi_n| / |x_m - x_n|^alpha
        dval = 0;
        if (m >= 2) {
            PairSampler sampler(seed ^ 0x9e3779b97f4a7c15ull, m);
            for (int k = 0; k < 1000; ++k) {
                auto [a, b] = sampler.next();
                if (a == 0) a = 1;
                if (a >= b) continue;
                const double num = std::abs(d.h.angle(a + 1) - d.h.angle(b));
                dval = std::max(dval, num / std::pow(nodes[b] - nodes[a], alpha));
            }
        }
        if (!(dval > 0)) dval = 1;
    }
    K26Params p;
    p.f.assign(nodes.begin(), nodes.end());
    p.g = p.f;
    p.f_limit = p.g_limit = d.h.total_length() + (d.complete ? 0.0 : (d.length_law ? d.length_law->tail(m) : 0.0));
    if (!d.complete && !d.length_law) extra |= kBoundTruncationOnly;
    p.nu = 1 / (2 * (1 + alpha));
    p.gamma = p.delta = 0.5;
    p.k = std::pow(dval, 1 / (1 + alpha));
    p.seed = seed;
    BoundCurve c = upper_k26_curve(d, p, r);
    c.method = BoundMethod::upper_holder;
    c.meta.insert(c.meta.begin(), {{"alpha", alpha}, {"d", dval}});
    finish(c, extra);
    return c;
}

std::optional<double> MethodSpec::get(const std::string& key) const {
    for (const auto& [k, v] : params)
        if (k == key) return v;
    return std::nullopt;
}

namespace {

std::string canonical_key(std::string k) {
    static const std::pair<const char*, const char*> greek[] = {
        {"\xCE\xB1", "alpha"}, {"\xCE\xB2", "beta"},  {"\xCF\x89", "omega"}, {"\xCF\x88", "psi"},
        {"\xCE\xBD", "nu"},    {"\xCE\xB3", "gamma"}, {"\xCE\xB4", "delta"}, {"k", "K"},
    };
    for (const auto& [from, to] : greek)
        if (k == from) return to;
    return k;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

void add_param(MethodSpec& spec, const std::string& token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + token + "'");
    const std::string key = canonical_key(trim(token.substr(0, eq)));
    const std::string val = trim(token.substr(eq + 1));
    double v = 0;
    const auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (res.ec != std::errc() || res.ptr != val.data() + val.size())
        throw std::invalid_argument("parameter " + key + " has a non-numeric value '" + val + "'");
    spec.params.emplace_back(key, v);
}

}  // namespace

std::vector<MethodSpec> parse_method_list(const std::string& text) {
    std::vector<MethodSpec> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string token = trim(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        pos = comma == std::string::npos ? text.size() + 1 : comma + 1;
        if (token.empty()) continue;
        const auto colon = token.find(':');
        const bool has_eq = token.find('=') != std::string::npos;
        if (colon != std::string::npos || !has_eq) {
            const std::string name = trim(token.substr(0, colon));
            const auto m = parse_bound_method(name);
            if (!m) throw std::invalid_argument("unknown bound method '" + name + "'");
            out.push_back(MethodSpec{*m, {}});
            if (colon != std::string::npos) {
                const std::string rest = trim(token.substr(colon + 1));
                if (!rest.empty()) add_param(out.back(), rest);
            }
        } else {
            if (out.empty()) throw std::invalid_argument("parameter '" + token + "' before any method");
            add_param(out.back(), token);
        }
    }
    if (out.empty()) throw std::invalid_argument("empty method list");
    return out;
}

namespace {

double required(const MethodSpec& s, const char* key) {
    const auto v = s.get(key);
    if (!v) throw std::invalid_argument(std::string(bound_method_name(s.method)) + " needs parameter " + key);
    return *v;
}

std::size_t window_param(const MethodSpec& s) {
    const double v = s.get("s").value_or(2);
    if (!(v >= 2) || v != std::floor(v) || v > 1e6)
        throw std::domain_error(std::string(bound_method_name(s.method)) + " needs an integer s >= 2");
    return static_cast<std::size_t>(v);
}

}  // namespace

BoundCurve evaluate_bound(const HamiltonianData& d, const MethodSpec& spec, std::span<const double> r,
                          std::uint64_t seed) {
    switch (spec.method) {
        case BoundMethod::lower_count: return lower_count_curve(d, window_param(spec), r);
        case BoundMethod::lower_k4: return lower_k4_curve(d, window_param(spec), r);
        case BoundMethod::upper_k26: {
            K26Params p;
            p.nu = required(spec, "nu");
            p.k = spec.get("K").value_or(1);
            p.gamma = spec.get("gamma").value_or(0.5);
            p.delta = spec.get("delta").value_or(1 - p.gamma);
            p.seed = seed;
            const auto nodes = d.h.nodes();
            p.f.assign(nodes.begin(), nodes.end());
            p.g = p.f;
            const double beyond = d.complete ? 0.0 : (d.length_law ? d.length_law->tail(d.h.size()) : 0.0);
            p.f_limit = p.g_limit = d.h.total_length() + beyond;
            BoundCurve c = upper_k26_curve(d, p, r);
            if (!d.complete && !d.length_law) finish(c, kBoundTruncationOnly);
            return c;
        }
        case BoundMethod::upper_k89: return upper_k89_curve(d, required(spec, "alpha"), required(spec, "beta"), r);
        case BoundMethod::upper_k66: return upper_k66_curve(d, r);
        case BoundMethod::upper_k79:
            return upper_k79_curve(d, required(spec, "alpha"), required(spec, "omega"), spec.get("psi").value_or(0), r);
        case BoundMethod::upper_k49:
            return upper_k49_curve(d, required(spec, "alpha"), required(spec, "beta"), spec.get("psi"),
                                   spec.get("ge").value_or(0) != 0, r);
        case BoundMethod::upper_holder: return upper_holder_curve(d, required(spec, "alpha"), spec.get("d"), r, seed);
    }
    throw std::invalid_argument("unknown bound method");
}

namespace {

void need(bool ok, const std::string& what) {
    if (!ok) throw std::domain_error("order_box: " + what);
}

OrderBox clamp_box(OrderBox b) {
    b.upper = std::min(1.0, b.upper);
    b.lower = std::clamp(b.lower, 0.0, b.upper);
    return b;
}

}  // namespace

OrderBox order_box(const std::string& tag, const OrderBoxParams& p) {
    OrderBox b;
    if (tag == "k104") {
        need(p.alpha0 >= 1 && p.beta0 >= 1, "k104 needs alpha0 >= 1 and beta0 >= 1 (summable angle steps)");
        b.upper = 1 / (p.alpha0 + p.beta0);
        b.lower = b.upper;
        b.upper_method = "upper-k89";
        b.lower_method = "lower-count";
    } else if (tag == "k94") {
        need(p.alpha0 >= 1 && p.omega0 >= 1, "k94 needs alpha0 >= 1 and omega0 >= 1");
        b.upper = 2 / (p.alpha0 + p.omega0);
        b.lower = 0;
        b.upper_method = "upper-k79";
        b.lower_method = "none";
    } else if (tag == "k91") {
        need(p.alpha0 > 1 && p.beta0 > 0 && p.beta0 <= 1, "k91 needs alpha0 > 1 and beta0 in (0, 1]");
        b.upper = (p.alpha0 - p.beta0) / (p.alpha0 * p.alpha0 - p.beta0);
        b.lower = 1 / (p.alpha0 + p.beta0);
        b.upper_method = "upper-k49";
        b.lower_method = "lower-count";
    } else if (tag == "k74") {
        need(p.alpha0 >= 1 && p.beta0 > 0, "k74 needs alpha0 >= 1 and beta0 > 0");
        if (p.alpha0 + p.beta0 >= 2) {
            b.upper = 1 / (p.alpha0 + p.beta0);
            b.branch = "alpha0+beta0>=2";
        } else {
            b.upper = (1 - p.beta0) / (p.alpha0 - p.beta0);
            b.branch = "alpha0+beta0<2";
        }
        b.lower = 1 / (p.alpha0 + p.beta0);
        b.upper_method = "k74";
        b.lower_method = "lower-count";
    } else if (tag.rfind("mixed-peaks-case", 0) == 0) {
        const double a = p.alpha, nu = p.nu, be = p.beta, ga = p.gamma;
        need(a > 1 && nu > 1 && be >= 0, "mixed-peaks cases need alpha > 1, nu > 1, beta >= 0");
        b.lower = 1 / (a + be);
        b.lower_method = "lower-count";
        const std::string c = tag.substr(16);
        if (c == "1") {
            need(be > 1, "case 1 needs beta > 1");
            b.upper = 1 / (std::min(a, nu) + be);
            b.upper_method = "upper-k89";
            b.branch = nu >= a ? "nu>=alpha" : "nu<alpha";
        } else if (c == "2") {
            need(be <= 1, "case 2 needs beta <= 1");
            b.upper_method = "upper-k79";
            if (nu >= a) {
                b.upper = 1 / (a + be);
                b.branch = "nu>=alpha";
            } else if (nu >= a - 2 * be) {
                b.upper = 1 / ((nu + a) / 2 + be);
                b.branch = "alpha-2beta<=nu<alpha";
            } else {
                b.upper = 1 / (nu + 2 * be);
                b.branch = "nu<alpha-2beta";
            }
        } else if (c == "3" || c == "4") {
            need(be <= 1, "cases 3 and 4 need beta <= 1");
            const double g = c == "3" ? 0.0 : ga;
            need(g >= 0 && g <= be, "case 4 needs 0 <= gamma <= beta");
            b.upper_method = "upper-k49";
            if (nu >= 2 * a - 1) {
                b.upper = (a - be + g) / (a * a - be + (a + 1) * g);
                b.branch = "nu>=2alpha-1";
            } else if (nu >= a) {
                b.upper = (nu + 1 - 2 * be + 2 * g) / ((nu - 1) * (a + 1) + 2 - 2 * be + 2 * (a + 1) * g);
                b.branch = "alpha<=nu<2alpha-1";
            } else {
                b.upper = (nu + 1 - 2 * be + 2 * g) / (nu * nu + 1 - 2 * be + 2 * (nu + 1) * g);
                b.branch = "nu<alpha";
            }
        } else {
            throw std::invalid_argument("unknown order-box case '" + tag + "'");
        }
    } else {
        throw std::invalid_argument("unknown order-box case '" + tag + "'");
    }
    return clamp_box(b);
}

LineFit loglog_fit(std::span<const double> r, std::span<const double> value) {
    LineFit fit;
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < r.size() && k < value.size(); ++k) {
        if (!(value[k] > 0) || !std::isfinite(value[k]) || !(r[k] > 0)) continue;
        xs.push_back(std::log(r[k]));
        ys.push_back(std::log(value[k]));
    }
    fit.points = xs.size();
    if (xs.size() < 2) return fit;
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    fit.slope = sxx > 0 ? sxy / sxx : 0;
    fit.intercept = my - fit.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

LineFit curve_slope(const BoundCurve& c, double r_min) {
    std::vector<double> r, v;
    for (const auto& s : c.samples) {
        if (s.r < r_min) continue;
        r.push_back(s.r);
        v.push_back(s.value);
    }
    return loglog_fit(r, v);
}

}  // namespace nevgrowth
