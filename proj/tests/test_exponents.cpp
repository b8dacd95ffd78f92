#include <cmath>
#include <stdexcept>
#include <string>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "nevgrowth/exponents.hpp"

using namespace nevgrowth;

namespace {

std::vector<double> powers(std::size_t n, double p) {
    std::vector<double> v(n);
    for (std::size_t j = 1; j <= n; ++j) v[j - 1] = std::pow(static_cast<double>(j), p);
    return v;
}

std::vector<double> partial_sums(std::size_t n, double p) {
    std::vector<double> s(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j) s[j] = s[j - 1] + std::pow(static_cast<double>(j), -p);
    return s;
}

// sum_{j = n+1}^{m} over the support, added from the small end. Squares are
// summed over k up to sqrt(m) * 1000 so the cut-off tail is negligible there too.
double brute_tail(Support sup, double power, std::size_t n, std::size_t m) {
    double s = 0;
    if (sup == Support::squares) {
        const auto kmax = static_cast<std::size_t>(std::sqrt(static_cast<double>(m))) * 1000;
        for (std::size_t k = kmax; k >= 1 && k * k > n; --k) s += std::pow(static_cast<double>(k), -2 * power);
        return s;
    }
    for (std::size_t j = m; j > n; --j) {
        const auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(j))));
        const bool square = k * k == j;
        bool in = true;
        switch (sup) {
            case Support::all: break;
            case Support::even: in = j % 2 == 0; break;
            case Support::odd: in = j % 2 == 1; break;
            case Support::squares: in = square; break;
            case Support::nonsquares: in = !square; break;
        }
        if (in) s += std::pow(static_cast<double>(j), -power);
    }
    return s;
}

}  // namespace

TEST_CASE("convergence exponent of power sequences") {
    const auto sq = powers(100000, 2);
    CHECK(convergence_exponent(sq, ExponentMethod::counting_slope).value == doctest::Approx(0.5).epsilon(0.02));
    CHECK(convergence_exponent(sq, ExponentMethod::ratio_limsup).value == doctest::Approx(0.5).epsilon(0.05));
    const auto p25 = powers(100000, 2.5);
    CHECK(convergence_exponent(p25, ExponentMethod::counting_slope).value == doctest::Approx(0.4).epsilon(0.02));
    CHECK(exact_power_exponent(2).value == 0.5);
    CHECK(exact_power_exponent(4).value == 0.25);
    CHECK_THROWS_AS(exact_power_exponent(0), std::domain_error);
    CHECK_THROWS_AS(convergence_exponent(sq, ExponentMethod::exact_power), std::invalid_argument);
}

TEST_CASE("exponential sequences have exponent near zero") {
    std::vector<double> e(600);
    for (std::size_t n = 0; n < e.size(); ++n) e[n] = std::exp(static_cast<double>(n + 1));
    CHECK(convergence_exponent(e, ExponentMethod::counting_slope).value < 0.05);
    // the sup of log n / n over the window sits at its left end
    const auto est = convergence_exponent(e, ExponentMethod::ratio_limsup);
    const double w = static_cast<double>(est.window_lo);
    CHECK(est.value == doctest::Approx(std::log(w) / w).epsilon(1e-12));
    std::vector<double> longer(6000);
    for (std::size_t n = 0; n < longer.size(); ++n) longer[n] = std::exp(static_cast<double>(n + 1) / 10);
    const auto slow = convergence_exponent(longer, ExponentMethod::ratio_limsup);
    const double ws = static_cast<double>(slow.window_lo);
    CHECK(slow.value == doctest::Approx(10 * std::log(ws) / ws).epsilon(1e-12));
}

TEST_CASE("incomplete tails are cut off") {
    // the last entries are small, so larger earlier values may still be missing
    auto v = powers(1000, 2);
    for (std::size_t j = 950; j < 1000; ++j) v[j] = 10.0;
    const auto est = convergence_exponent(v, ExponentMethod::counting_slope);
    CHECK(est.cutoff == 10.0);
    CHECK_THROWS_AS(convergence_exponent(powers(10, 2), ExponentMethod::counting_slope), std::length_error);
    std::vector<double> bad = powers(100, 2);
    bad[3] = -1;
    CHECK_THROWS_AS(convergence_exponent(bad, ExponentMethod::counting_slope), std::domain_error);
}

TEST_CASE("l^p sums in log space") {
    const std::vector<double> ones{1, 1, 1, 1};
    CHECK(lp_sum(ones, 2).value == doctest::Approx(4));
    const auto inv2 = powers(1000000, -2);
    const double zeta2 = std::numbers::pi * std::numbers::pi / 6;
    const double s = lp_sum(inv2, 1).value;
    CHECK(s <= zeta2);
    CHECK(zeta2 - s <= 1.0 / 1000000);
    const std::vector<double> tiny(10, 1e-300);
    const LpSum t = lp_sum(tiny, 1.5);
    CHECK(std::isfinite(t.log_value));
    CHECK(t.log_value == doctest::Approx(std::log(10.0) + 1.5 * std::log(1e-300)).epsilon(1e-14));
    CHECK_THROWS_AS(lp_sum(ones, 0), std::domain_error);
}

TEST_CASE("Hurwitz zeta") {
    CHECK(hurwitz_zeta(2, 1) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-14));
    double brute = 0;
    for (int k = 2000000; k >= 0; --k) brute += std::pow(5.5 + k, -3.0);
    CHECK(hurwitz_zeta(3, 5.5) == doctest::Approx(brute).epsilon(1e-12));
    CHECK_THROWS(hurwitz_zeta(1, 1));
}

TEST_CASE("power-law tails on each support") {
    for (Support sup : {Support::all, Support::even, Support::odd, Support::squares, Support::nonsquares}) {
        const double power = sup == Support::squares ? 1.5 : 3;
        const PowerLaw law({{sup, 2.0, power}});
        for (std::size_t n : {0u, 1u, 7u, 100u, 1001u}) {
            const double want = 2 * brute_tail(sup, power, n, 2000000);
            CAPTURE(std::string(support_name(sup)));
            CAPTURE(n);
            CHECK(law.tail(n) == doctest::Approx(want).epsilon(1e-9));
        }
    }
    const PowerLaw inv2({{Support::all, 1, 2}});
    for (std::size_t n : {10u, 1000u, 100000u}) {
        const double t = inv2.tail(n), nd = static_cast<double>(n);
        CHECK(t <= 1 / nd);
        CHECK(t >= 1 / (nd + 1));
    }
    CHECK(std::isinf(PowerLaw({{Support::all, 1, 1}}).tail(10)));
    const PowerLaw mixed({{Support::even, 1, 2}, {Support::odd, 1, 3}});
    CHECK(mixed.value(4) == doctest::Approx(1.0 / 16));
    CHECK(mixed.value(3) == doctest::Approx(1.0 / 27));
    const PowerLaw sq = mixed.pow(0.5);
    CHECK(sq.value(4) == doctest::Approx(0.25));
    CHECK(sq.value(3) == doctest::Approx(std::pow(3.0, -1.5)));
    CHECK(mixed.min_power() == 2);
}

TEST_CASE("mixed-peak square tails scale like N^{(1 - nu)/2}") {
    const double nu = 3;
    const PowerLaw peaks({{Support::squares, 1, nu / 2}});
    const double ratio = peaks.tail(1000000) / peaks.tail(10000);
    CHECK(ratio == doctest::Approx(std::pow(100.0, (1 - nu) / 2)).epsilon(0.02));
}

TEST_CASE("tail sums over stored values") {
    const std::vector<double> v{1, 2, 3};
    CHECK(tail_sum(v, 3).value == 0);
    CHECK(tail_sum(v, 3).truncation_only);
    CHECK(tail_sum(v, 1).value == 5);
    const auto t = tail_sum(PowerLaw({{Support::all, 1, 2}}), 10);
    CHECK_FALSE(t.truncation_only);
}

TEST_CASE("decade diagnostic verdicts") {
    CHECK(classify_partial_sums(partial_sums(1000000, 1)).verdict == TailVerdict::divergent);
    CHECK(classify_partial_sums(partial_sums(1000000, 0.5)).verdict == TailVerdict::divergent);
    CHECK(classify_partial_sums(partial_sums(1000000, 2)).verdict == TailVerdict::summable);
    CHECK(classify_partial_sums(partial_sums(1000000, 1.5)).verdict == TailVerdict::summable);
    CHECK(classify_partial_sums(partial_sums(50, 2)).verdict == TailVerdict::inconclusive);
    CHECK(std::string(tail_verdict_name(TailVerdict::summable)) == "appears summable");

    DecadeAccumulator acc(100000);
    for (std::size_t j = 1; j <= 100000; ++j) acc.add(1.0 / static_cast<double>(j));
    const auto direct = classify_partial_sums(partial_sums(100000, 1));
    const auto streamed = acc.result();
    CHECK(streamed.verdict == direct.verdict);
    CHECK(streamed.last_decade == doctest::Approx(direct.last_decade).epsilon(1e-12));
    CHECK(streamed.third_decade == doctest::Approx(direct.third_decade).epsilon(1e-12));
}
