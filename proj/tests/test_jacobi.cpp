#include <cmath>
#include <stdexcept>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nevgrowth/jacobi.hpp"
#include "nevgrowth/monodromy.hpp"

using namespace nevgrowth;

namespace {

constexpr double kPi = std::numbers::pi;

JacobiParameters random_jacobi(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> ua(-2, 2), ub(0.5, 2);
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = ua(rng);
        b[k] = ub(rng);
    }
    return {a, b};
}

// p_n(0), q_n(0) from the recurrence in long double, no rescaling.
void recurrence_oracle(const JacobiParameters& j, std::vector<long double>& p, std::vector<long double>& q) {
    const std::size_t n = j.size();
    p.assign(n + 1, 0);
    q.assign(n + 1, 0);
    p[0] = 1;
    q[0] = 0;
    p[1] = -static_cast<long double>(j.a[0]) / j.b[0];
    q[1] = 1.0L / j.b[0];
    for (std::size_t k = 1; k < n; ++k) {
        p[k + 1] = -(j.a[k] * p[k] + j.b[k - 1] * p[k - 1]) / j.b[k];
        q[k + 1] = -(j.a[k] * q[k] + j.b[k - 1] * q[k - 1]) / j.b[k];
    }
}

JacobiParameters constant(std::size_t n, double a, double b) {
    return {std::vector<double>(n, a), std::vector<double>(n, b)};
}

}  // namespace

TEST_CASE("polynomials at zero") {
    const auto pq = poly_at_zero(JacobiParameters({0}, {1}));
    REQUIRE(pq.size() == 2);
    CHECK(pq.p(0) == 1);
    CHECK(pq.q(0) == 0);
    CHECK(pq.p(1) == 0);
    CHECK(pq.q(1) == 1);
    const auto pq2 = poly_at_zero(JacobiParameters({2}, {1}));
    CHECK(pq2.p(1) == -2);
    CHECK(pq2.q(1) == 1);
    CHECK_THROWS(JacobiParameters({0, 0}, {1, 0}));
    CHECK_THROWS(JacobiParameters({0}, {1, 1}));
}

TEST_CASE("polynomial values agree with the long double recurrence") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 20; ++t) {
        const auto j = random_jacobi(rng, 40);
        std::vector<long double> p, q;
        recurrence_oracle(j, p, q);
        const auto pq = poly_at_zero(j);
        for (std::size_t n = 0; n <= 40; ++n) {
            const long double s = std::max(std::abs(p[n]), std::abs(q[n]));
            CHECK(std::abs(pq.p(n) - p[n]) <= 1e-11L * s);
            CHECK(std::abs(pq.q(n) - q[n]) <= 1e-11L * s);
        }
    }
}

TEST_CASE("Wronskian K_{n+1,n} b_n = 1") {
    std::mt19937_64 rng(1);
    const auto j = random_jacobi(rng, 200);
    const auto pq = poly_at_zero(j);
    for (std::size_t n = 0; n < 200; ++n) CHECK(std::abs(k_kernel(pq, n + 1, n) * j.b[n] - 1) <= 1e-12);

    // b_n = e^{n} drives p_n, q_n through the rescaling range
    std::vector<double> b(400);
    for (std::size_t n = 0; n < b.size(); ++n) b[n] = std::exp(static_cast<double>(n) * 1.5);
    const JacobiParameters big(std::vector<double>(400, 0.1), b);
    const auto pqb = poly_at_zero(big);
    for (std::size_t n = 0; n < 400; n += 7) CHECK(std::abs(k_kernel(pqb, n + 1, n) * b[n] - 1) <= 1e-12);
}

TEST_CASE("kernel entries two and three apart") {
    std::mt19937_64 rng(2);
    const auto j = random_jacobi(rng, 30);
    const auto pq = poly_at_zero(j);
    for (std::size_t n = 0; n + 3 < 30; ++n) {
        CHECK(k_kernel(pq, n, n) == 0);
        CHECK(k_kernel(pq, n + 2, n) == doctest::Approx(-k_kernel(pq, n, n + 2)));
        // stepping the recurrence once from K_{n+1,n} = 1/b_n, K_{n,n} = 0
        const double k2 = -j.a[n + 1] / (j.b[n] * j.b[n + 1]);
        CHECK(k_kernel(pq, n + 2, n) == doctest::Approx(k2).epsilon(1e-11));
        const double k3 = (j.a[n + 1] * j.a[n + 2] - j.b[n + 1] * j.b[n + 1]) / (j.b[n] * j.b[n + 1] * j.b[n + 2]);
        CHECK(k_kernel(pq, n + 3, n) == doctest::Approx(k3).epsilon(1e-10));
    }
}

TEST_CASE("free Jacobi matrix bridges to unit lengths and quarter turns") {
    const auto h = jacobi_to_hamiltonian(constant(12, 0, 1));
    REQUIRE(h.size() == 13);
    for (std::size_t n = 1; n <= 13; ++n) {
        CHECK(h.length(n) == doctest::Approx(1).epsilon(1e-15));
        CHECK(h.angle(n) == doctest::Approx(kPi / 2 * static_cast<double>(n)).epsilon(1e-14));
    }
}

TEST_CASE("inverse bridge on a hand example") {
    HamburgerHamiltonian h({1, 1, 1}, {kPi / 2, kPi, 3 * kPi / 2});
    const auto j = hamiltonian_to_jacobi(h);
    REQUIRE(j.size() == 2);
    CHECK(std::abs(j.a[0]) < 1e-15);
    CHECK(j.b[0] == doctest::Approx(1).epsilon(1e-15));
    CHECK(std::abs(j.a[1]) < 1e-15);
    CHECK_THROWS(hamiltonian_to_jacobi(HamburgerHamiltonian({2, 1, 1}, {kPi / 2, kPi, 3 * kPi / 2})));
    CHECK_THROWS(hamiltonian_to_jacobi(HamburgerHamiltonian({1, 1}, {kPi / 2, kPi})));
}

TEST_CASE("bridge identities on random inputs") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 3 + static_cast<std::size_t>(t);
        const auto j = random_jacobi(rng, n);
        CHECK(bridge_round_trip_error(j) <= 1e-10);
        const auto pq = poly_at_zero(j);
        const auto h = jacobi_to_hamiltonian(j);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(h.length(k + 2) == doctest::Approx(pq.p(k + 1) * pq.p(k + 1) + pq.q(k + 1) * pq.q(k + 1)).epsilon(1e-12));
            const double jump = h.step(k + 1);
            CHECK(jump != 0);
            CHECK(std::abs(jump) <= kPi / 2);
            const double bk = 1 / (std::sqrt(h.length(k + 1) * h.length(k + 2)) * std::abs(std::sin(jump)));
            CHECK(bk == doctest::Approx(j.b[k]).epsilon(1e-10));
        }
        const auto b2 = b_s_sequence(h, 2);
        const auto b3h = b_s_sequence(h, 3);
        const auto b3 = b3_sequence(j);
        for (std::size_t k = 0; k < n; ++k) CHECK(b2[k] == doctest::Approx(j.b[k]).epsilon(1e-10));
        for (std::size_t k = 0; k + 1 < n; ++k) CHECK(b3[k] == doctest::Approx(b3h[k]).epsilon(1e-10));
    }
}

TEST_CASE("sum of K_jk^2 equals 2 det Omega") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        const auto j = random_jacobi(rng, 2 + static_cast<std::size_t>(t) % 49);
        const auto rep = indeterminacy_diagnostic(j);
        // independent double sum over the long double recurrence
        std::vector<long double> p, q;
        recurrence_oracle(j, p, q);
        long double s = 0;
        for (std::size_t a = 0; a < j.size(); ++a)
            for (std::size_t b = 0; b < j.size(); ++b) {
                const long double k = q[a] * p[b] - p[a] * q[b];
                s += k * k;
            }
        CHECK(std::abs(rep.k_square_sum - s) <= 1e-9L * s);
        CHECK(rep.identity_holds);
        CHECK(rep.relative_gap <= 1e-8);
    }
}

TEST_CASE("indeterminacy tail verdicts") {
    std::vector<double> b(20000);
    for (std::size_t n = 0; n < b.size(); ++n) b[n] = static_cast<double>((n + 1) * (n + 1));
    const JacobiParameters fast(std::vector<double>(b.size(), 0), b);
    CHECK(indeterminacy_diagnostic(fast).tail.verdict == TailVerdict::summable);
    CHECK(indeterminacy_diagnostic(constant(20000, 0, 1)).tail.verdict == TailVerdict::divergent);
}

TEST_CASE("b3 sequence") {
    const auto b3 = b3_sequence(constant(10, 0, 3));
    for (double v : b3) CHECK(v == doctest::Approx(3 / std::sqrt(2.0)).epsilon(1e-15));
    JacobiParameters big({0, 1e8, 0}, {1, 1, 1});
    CHECK(b3_sequence(big)[0] == doctest::Approx(1e-8).epsilon(1e-12));
    JacobiParameters huge({0, 0}, {1e200, 1e200});
    CHECK(b3_sequence(huge)[0] == doctest::Approx(1e200 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("Carleman sums") {
    std::vector<double> b(100000);
    for (std::size_t n = 0; n < b.size(); ++n) b[n] = static_cast<double>(n + 1) * static_cast<double>(n + 1);
    const JacobiParameters sq(std::vector<double>(b.size(), 0), b);
    const auto c = carleman_sum(sq, b.size());
    CHECK(c.value == doctest::Approx(kPi * kPi / 6).epsilon(1e-4));
    CHECK(c.tail.verdict == TailVerdict::summable);
    CHECK(carleman_sum(constant(10, 0, 1), 10).value == 10);
    for (std::size_t n = 0; n < b.size(); ++n) b[n] = static_cast<double>(n + 1);
    const JacobiParameters lin(std::vector<double>(b.size(), 0), b);
    CHECK(carleman_sum(lin, b.size()).tail.verdict == TailVerdict::divergent);
    CHECK_THROWS(carleman_sum(lin, b.size() + 1));
}

TEST_CASE("Berezanskii conditions") {
    const std::size_t n = 100000;
    std::vector<double> b(n);
    for (std::size_t k = 0; k < n; ++k) b[k] = static_cast<double>(k + 1) * static_cast<double>(k + 1);
    const auto rep = berezanskii_check(JacobiParameters(std::vector<double>(n, 0), b));
    CHECK(rep.verdict == BerezanskiiVerdict::satisfied);
    CHECK(rep.beta_limit == 0);
    CHECK(rep.predicted_order.value == doctest::Approx(0.5).epsilon(0.02));

    // a_n = b_n with b_n = (n+1)^2: beta_n -> -1/2
    const auto half = berezanskii_check(JacobiParameters(b, b));
    CHECK(half.beta_limit == doctest::Approx(-0.5).epsilon(1e-3));
    CHECK(half.beta_limit_inside);
    CHECK(half.beta_variation.verdict == TailVerdict::summable);

    // constant b: Carleman diverges
    CHECK(berezanskii_check(constant(10000, 0, 1)).verdict == BerezanskiiVerdict::violated);
    // beta_n = -1.5 everywhere: limit outside (-1, 1)
    CHECK(berezanskii_check(JacobiParameters(std::vector<double>(n, 3), std::vector<double>(n, 1))).verdict ==
          BerezanskiiVerdict::violated);

    std::vector<double> e(600);
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = std::exp(static_cast<double>(k));
    const auto er = berezanskii_check(JacobiParameters(std::vector<double>(e.size(), 0), e));
    CHECK(er.predicted_order.value < 0.05);
    CHECK_THROWS(berezanskii_check(constant(2, 0, 1)));
}

TEST_CASE("streamed bridge source matches the stored bridge") {
    std::mt19937_64 rng(6);
    const auto j = random_jacobi(rng, 300);
    JacobiHamiltonianSource src([&j] { return stream_of(j); }, j.size() + 1, "random");
    const auto streamed = src.materialize(j.size() + 1);
    const auto stored = jacobi_to_hamiltonian(j);
    REQUIRE(streamed.size() == stored.size());
    for (double r : {1.0, 100.0, 1e4})
        CHECK(log_abs_w22(streamed, r) == doctest::Approx(log_abs_w22(stored, r)).epsilon(1e-10));
}

TEST_CASE("log|B(ir)| against the unscaled polynomial product") {
    // w22(z) of the bridged Hamiltonian through the 2x2 product in long double
    std::mt19937_64 rng(7);
    const auto j = random_jacobi(rng, 12);
    const auto h = jacobi_to_hamiltonian(j);
    for (double r : {0.1, 1.0, 5.0}) {
        std::complex<long double> w[4] = {1, 0, 0, 1};
        const std::complex<long double> z(0, r);
        for (std::size_t k = 1; k <= h.size(); ++k) {
            const long double c = std::cos(static_cast<long double>(h.angle(k)));
            const long double s = std::sin(static_cast<long double>(h.angle(k)));
            const auto zl = z * static_cast<long double>(h.length(k));
            const std::complex<long double> m[4] = {1.0L - zl * c * s, zl * c * c, -zl * s * s, 1.0L + zl * c * s};
            const std::complex<long double> nw[4] = {w[0] * m[0] + w[1] * m[2], w[0] * m[1] + w[1] * m[3],
                                                     w[2] * m[0] + w[3] * m[2], w[2] * m[1] + w[3] * m[3]};
            std::copy(nw, nw + 4, w);
        }
        CHECK(nevanlinna_logB(j, r) == doctest::Approx(static_cast<double>(std::log(std::abs(w[3])))).epsilon(1e-10));
    }
}
