#include "nevgrowth/exponents.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "numeric_util.hpp"

namespace nevgrowth {

const char* exponent_method_name(ExponentMethod m) {
    switch (m) {
        case ExponentMethod::ratio_limsup: return "ratio-limsup";
        case ExponentMethod::counting_slope: return "counting-slope";
        case ExponentMethod::exact_power: return "exact-power";
    }
    return "?";
}

std::optional<ExponentMethod> parse_exponent_method(const std::string& name) {
    if (name == "ratio-limsup") return ExponentMethod::ratio_limsup;
    if (name == "counting-slope") return ExponentMethod::counting_slope;
    if (name == "exact-power") return ExponentMethod::exact_power;
    return std::nullopt;
}

namespace {

std::vector<double> complete_part(std::span<const double> seq, double* cutoff) {
    if (seq.size() < kMinExponentLength)
        throw std::length_error("sequence too short for exponent estimation (need " +
                                std::to_string(kMinExponentLength) + " values)");
    for (double v : seq)
        if (!(v > 0) || !std::isfinite(v)) throw std::domain_error("sequence values must be positive and finite");
    const std::size_t last = seq.size() - (seq.size() + 9) / 10;
    const double rc = *std::min_element(seq.begin() + static_cast<std::ptrdiff_t>(last), seq.end());
    std::vector<double> kept;
    kept.reserve(seq.size());
    for (double v : seq)
        if (v <= rc) kept.push_back(v);
    std::sort(kept.begin(), kept.end());
    *cutoff = rc;
    return kept;
}

}  // namespace

ExponentEstimate convergence_exponent(std::span<const double> seq, ExponentMethod method) {
    if (method == ExponentMethod::exact_power)
        throw std::invalid_argument("exact-power needs a declared power; use exact_power_exponent");
    ExponentEstimate est;
    est.method = method;
    const std::vector<double> a = complete_part(seq, &est.cutoff);
    const std::size_t m = a.size();

    if (method == ExponentMethod::ratio_limsup) {
        est.window_lo = std::max<std::size_t>(2, m / 10);
        est.window_hi = m;
        double hi = 0, lo = std::numeric_limits<double>::infinity();
        for (std::size_t n = est.window_lo; n <= m; ++n) {
            const double la = std::log(a[n - 1]);
            if (la <= 0) continue;
            const double ratio = std::log(static_cast<double>(n)) / la;
            hi = std::max(hi, ratio);
            lo = std::min(lo, ratio);
        }
        est.value = hi;
        est.residual = std::isfinite(lo) ? hi - lo : 0;
        return est;
    }

    // N(r) = #{a_n <= r}; at r = a_n the count is the last rank holding that value.
    const double r_lo = est.cutoff / 100;
    std::size_t first = static_cast<std::size_t>(std::lower_bound(a.begin(), a.end(), r_lo) - a.begin()) + 1;
    if (m - first + 1 < 8) first = std::max<std::size_t>(1, m / 10);
    est.window_lo = first;
    est.window_hi = m;

    constexpr std::size_t kMaxPoints = 4096;
    std::vector<double> xs, ys;
    const double span = std::log(static_cast<double>(m)) - std::log(static_cast<double>(first));
    std::size_t prev = 0;
    for (std::size_t k = 0; k < kMaxPoints; ++k) {
        const double t = kMaxPoints == 1 ? 0 : static_cast<double>(k) / (kMaxPoints - 1);
        std::size_t n = static_cast<std::size_t>(std::llround(first * std::exp(span * t)));
        n = std::clamp(n, first, m);
        if (n == prev) continue;
        prev = n;
        // advance to the last rank with the same value
        const std::size_t rank = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), a[n - 1]) - a.begin());
        xs.push_back(std::log(a[n - 1]));
        ys.push_back(std::log(static_cast<double>(rank)));
    }
    const std::size_t np = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < np; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(np);
    my /= static_cast<double>(np);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < np; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxx > 0 ? sxy / sxx : 0;
    double ss = 0;
    for (std::size_t i = 0; i < np; ++i) {
        const double e = ys[i] - (my + slope * (xs[i] - mx));
        ss += e * e;
    }
    est.value = std::max(0.0, slope);
    est.residual = std::sqrt(ss / static_cast<double>(np));
    return est;
}

ExponentEstimate exact_power_exponent(double power) {
    if (!(power > 0) || !std::isfinite(power)) throw std::domain_error("declared power must be positive");
    ExponentEstimate est;
    est.method = ExponentMethod::exact_power;
    est.value = 1.0 / power;
    return est;
}

LpSum lp_sum(std::span<const double> seq, double p) {
    if (!(p > 0)) throw std::domain_error("lp_sum needs p > 0");
    LpSum out;
    out.log_value = -std::numeric_limits<double>::infinity();
    if (seq.empty()) return out;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < seq.size(); ++j) {
        if (!(seq[j] >= 0)) throw std::domain_error("lp_sum needs nonnegative values");
        const double t = p * std::log(seq[j]);
        if (t > top) {
            top = t;
            out.argmax = j;
        }
    }
    if (!std::isfinite(top)) return out;  // all zeros
    detail::NeumaierSum acc;
    for (double v : seq) acc.add(std::exp(p * std::log(v) - top));
    out.log_value = top + std::log(acc.value());
    out.value = std::exp(out.log_value);
    return out;
}

double hurwitz_zeta(double s, double q) {
    if (!(s > 1) || !(q > 0)) throw std::domain_error("hurwitz_zeta needs s > 1 and q > 0");
    static std::once_flag quiet;
    std::call_once(quiet, [] { gsl_set_error_handler_off(); });
    gsl_sf_result res;
    const int status = gsl_sf_hzeta_e(s, q, &res);
    if (status == GSL_EUNDRFLW) return 0.0;
    if (status != GSL_SUCCESS) throw std::runtime_error(std::string("hurwitz zeta: ") + gsl_strerror(status));
    return res.val;
}

const char* support_name(Support s) {
    switch (s) {
        case Support::all: return "all";
        case Support::even: return "even";
        case Support::odd: return "odd";
        case Support::squares: return "squares";
        case Support::nonsquares: return "nonsquares";
    }
    return "?";
}

namespace {

std::size_t isqrt(std::size_t n) {
    auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (k * k > n) --k;
    while ((k + 1) * (k + 1) <= n) ++k;
    return k;
}

bool in_support(Support s, std::size_t j) {
    switch (s) {
        case Support::all: return true;
        case Support::even: return j % 2 == 0;
        case Support::odd: return j % 2 == 1;
        case Support::squares: {
            const std::size_t k = isqrt(j);
            return k * k == j;
        }
        case Support::nonsquares: {
            const std::size_t k = isqrt(j);
            return k * k != j;
        }
    }
    return false;
}

double term_tail(const PowerLaw::Term& t, std::size_t n) {
    const double s = t.power;
    const double inf = std::numeric_limits<double>::infinity();
    const double nd = static_cast<double>(n);
    switch (t.support) {
        case Support::all:
            return s <= 1 ? inf : t.coeff * hurwitz_zeta(s, nd + 1);
        case Support::even:
            return s <= 1 ? inf : t.coeff * std::exp2(-s) * hurwitz_zeta(s, static_cast<double>(n / 2) + 1);
        case Support::odd:
            return s <= 1 ? inf : t.coeff * std::exp2(-s) * hurwitz_zeta(s, static_cast<double>((n + 1) / 2) + 0.5);
        case Support::squares:
            return 2 * s <= 1 ? inf : t.coeff * hurwitz_zeta(2 * s, static_cast<double>(isqrt(n)) + 1);
        case Support::nonsquares:
            return s <= 1 ? inf
                          : t.coeff * (hurwitz_zeta(s, nd + 1) -
                                       hurwitz_zeta(2 * s, static_cast<double>(isqrt(n)) + 1));
    }
    return inf;
}

}  // namespace

PowerLaw::PowerLaw(std::vector<Term> terms) : terms_(std::move(terms)) {
    for (const Term& t : terms_)
        if (!(t.coeff > 0) || !std::isfinite(t.power)) throw std::domain_error("invalid power-law term");
}

double PowerLaw::value(std::size_t j) const {
    if (j == 0) throw std::out_of_range("power-law index starts at 1");
    double v = 0;
    for (const Term& t : terms_)
        if (in_support(t.support, j)) v += t.coeff * std::pow(static_cast<double>(j), -t.power);
    return v;
}

double PowerLaw::tail(std::size_t n) const {
    double v = 0;
    for (const Term& t : terms_) v += term_tail(t, n);
    return v;
}

PowerLaw PowerLaw::pow(double p) const {
    std::vector<Term> out = terms_;
    for (Term& t : out) {
        t.coeff = std::pow(t.coeff, p);
        t.power *= p;
    }
    return PowerLaw(std::move(out));
}

double PowerLaw::min_power() const {
    double m = std::numeric_limits<double>::infinity();
    for (const Term& t : terms_) m = std::min(m, t.support == Support::squares ? 2 * t.power : t.power);
    return m;
}

TailSum tail_sum(std::span<const double> seq, std::size_t n) {
    TailSum out;
    if (n >= seq.size()) return out;
    detail::NeumaierSum acc;
    for (std::size_t j = seq.size(); j-- > n;) acc.add(seq[j]);
    out.value = acc.value();
    return out;
}

TailSum tail_sum(const PowerLaw& law, std::size_t n) { return TailSum{law.tail(n), false}; }

const char* tail_verdict_name(TailVerdict v) {
    switch (v) {
        case TailVerdict::summable: return "appears summable";
        case TailVerdict::divergent: return "appears divergent";
        case TailVerdict::inconclusive: return "inconclusive";
    }
    return "?";
}

TailDiagnostic classify_decades(std::size_t n, double s_n, double s_n10, double s_n100, double s_n1000) {
    TailDiagnostic d;
    d.n = n;
    d.sum = s_n;
    d.last_decade = s_n - s_n10;
    d.previous_decade = s_n10 - s_n100;
    d.third_decade = s_n100 - s_n1000;
    if (n < 100) return d;
    if (d.last_decade <= 1e-6 * std::abs(s_n)) {
        d.verdict = TailVerdict::summable;
    } else if (d.last_decade >= 0.99 * d.previous_decade) {
        d.verdict = TailVerdict::divergent;
    } else if (n >= 1000 && d.last_decade <= 0.9 * d.previous_decade &&
               d.previous_decade <= 0.9 * d.third_decade) {
        // increments shrink geometrically from decade to decade
        d.verdict = TailVerdict::summable;
    }
    return d;
}

TailDiagnostic classify_partial_sums(std::span<const double> partial) {
    if (partial.empty()) return {};
    const std::size_t n = partial.size() - 1;
    return classify_decades(n, partial[n], partial[n / 10], partial[n / 100], partial[n / 1000]);
}

DecadeAccumulator::DecadeAccumulator(std::size_t n) : n_(n) {}

void DecadeAccumulator::add(double term) {
    const double t = sum_ + term;
    if (std::abs(sum_) >= std::abs(term))
        comp_ += (sum_ - t) + term;
    else
        comp_ += (term - t) + sum_;
    sum_ = t;
    ++count_;
    const std::size_t marks[3] = {n_ / 1000, n_ / 100, n_ / 10};
    for (int i = 0; i < 3; ++i)
        if (count_ == marks[i]) checkpoints_[i] = sum();
}

double DecadeAccumulator::sum() const { return sum_ + comp_; }

TailDiagnostic DecadeAccumulator::result() const {
    return classify_decades(n_, sum(), checkpoints_[2], checkpoints_[1], checkpoints_[0]);
}

}  // namespace nevgrowth
