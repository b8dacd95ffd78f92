#include <cmath>
#include <stdexcept>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nevgrowth/exponents.hpp"
#include "nevgrowth/monodromy.hpp"

using namespace nevgrowth;

namespace {

constexpr double kPi = std::numbers::pi;
using lcplx = std::complex<long double>;

// Plain product M_1 M_2 ... M_N in long double, no scaling.
std::array<lcplx, 4> naive_product(const HamburgerHamiltonian& h, cplx z) {
    std::array<lcplx, 4> w{1, 0, 0, 1};
    const lcplx zz(z.real(), z.imag());
    for (std::size_t j = 1; j <= h.size(); ++j) {
        const long double c = std::cos(static_cast<long double>(h.angle(j)));
        const long double s = std::sin(static_cast<long double>(h.angle(j)));
        const lcplx zl = zz * static_cast<long double>(h.length(j));
        const std::array<lcplx, 4> m{1.0L - zl * c * s, zl * c * c, -zl * s * s, 1.0L + zl * c * s};
        w = {w[0] * m[0] + w[1] * m[2], w[0] * m[1] + w[1] * m[3], w[2] * m[0] + w[3] * m[2],
             w[2] * m[1] + w[3] * m[3]};
    }
    return w;
}

HamburgerHamiltonian random_h(std::mt19937_64& rng, std::size_t n, double lo = 1e-8) {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> l(n), phi(n);
    for (std::size_t j = 0; j < n; ++j) {
        l[j] = std::exp(std::log(lo) * u(rng));
        phi[j] = kPi * u(rng);
    }
    return HamburgerHamiltonian(l, phi);
}

// l_j = j^-2, phi_j = j pi / 4, unbounded, with the exact tail.
class PowerSource final : public HamiltonianSource {
public:
    class Stream final : public IntervalStream {
    public:
        bool next(Interval& out) override {
            ++j_;
            out.length = 1.0 / (static_cast<double>(j_) * j_);
            out.angle = static_cast<double>(j_ % 8) * kPi / 4;
            return true;
        }

    private:
        std::size_t j_ = 0;
    };
    explicit PowerSource(bool with_tail) : with_tail_(with_tail) {}
    std::unique_ptr<IntervalStream> open() const override { return std::make_unique<Stream>(); }
    std::optional<std::size_t> size() const override { return std::nullopt; }
    std::optional<double> length_tail(std::size_t n) const override {
        if (!with_tail_) return std::nullopt;
        return PowerLaw({{Support::all, 1, 2}}).tail(n);
    }
    std::string describe() const override { return "power"; }

private:
    bool with_tail_;
};

}  // namespace

TEST_CASE("single interval factors") {
    const cplx z(0.7, -1.3);
    const auto up = interval_factor(1, kPi / 2, z);
    CHECK(std::abs(up.value(0, 0) - cplx(1)) < 1e-15);
    CHECK(std::abs(up.value(0, 1)) < 1e-15);
    CHECK(std::abs(up.value(1, 0) + z) < 1e-15);
    CHECK(std::abs(up.value(1, 1) - cplx(1)) < 1e-15);
    const auto flat = interval_factor(1, 0, z);
    CHECK(std::abs(flat.value(0, 1) - z) < 1e-15);
    CHECK(std::abs(flat.value(1, 0)) < 1e-15);
    const auto zero = interval_factor(2.5, 0.4, cplx(0));
    CHECK(std::abs(zero.value(0, 0) - cplx(1)) < 1e-15);
    CHECK(std::abs(zero.value(1, 0)) < 1e-15);
}

TEST_CASE("two-interval monodromy in closed form") {
    HamburgerHamiltonian h({1, 1}, {kPi / 2, 0});
    const cplx z(0.3, 0.2);
    const Monodromy w = monodromy(h, z);
    CHECK(std::abs(w.value(0, 0) - cplx(1)) < 1e-15);
    CHECK(std::abs(w.value(0, 1) - z) < 1e-15);
    CHECK(std::abs(w.value(1, 0) + z) < 1e-15);
    CHECK(std::abs(w.value(1, 1) - (1.0 - z * z)) < 1e-15);
    for (double r = 1e-2; r <= 1e10; r *= 1.7) {
        const double want = std::log1p(r * r);
        CHECK(std::abs(log_abs_w22(h, r) - want) <= 1e-12 * std::abs(want));
    }
    CHECK(monodromy(h, cplx(0)).log_abs_w22() == 0);
}

TEST_CASE("a single vertical interval leaves w22 = 1") {
    HamburgerHamiltonian h({3}, {kPi / 2});
    CHECK(std::abs(log_abs_w22(h, 1e6)) < 1e-15);
}

TEST_CASE("scaled product matches the unscaled long double product") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
        const auto h = random_h(rng, 20, 1e-2);
        for (double r : {0.01, 0.5, 3.0, 10.0}) {
            const auto want = naive_product(h, cplx(0, r));
            const Monodromy w = monodromy(h, cplx(0, r));
            for (int i = 0; i < 2; ++i)
                for (int k = 0; k < 2; ++k) {
                    const auto e = want[static_cast<std::size_t>(2 * i + k)];
                    const cplx got = w.value(i, k);
                    CHECK(std::abs(lcplx(got.real(), got.imag()) - e) <= 1e-10L * std::abs(e) + 1e-15L);
                }
            const long double lw = std::log(std::abs(want[3]));
            CHECK(std::abs(log_abs_w22(h, r) - lw) <= 1e-10L * std::max(1.0L, std::abs(lw)));
        }
    }
}

TEST_CASE("determinant stays one through large products") {
    std::mt19937_64 rng(4);
    const auto h = random_h(rng, 20000);
    for (double r : {1e2, 1e6, 1e10}) {
        const Monodromy w = monodromy(h, cplx(0, r));
        CHECK(std::abs(w.determinant() - cplx(1)) < 1e-9);
        CHECK(std::abs(w.log_abs_det()) < 1e-9);
    }
}

TEST_CASE("conjugate symmetry W(conj z) = conj W(z)") {
    std::mt19937_64 rng(8);
    const auto h = random_h(rng, 50, 1e-3);
    const cplx z(2.0, 5.0);
    const Monodromy a = monodromy(h, z), b = monodromy(h, std::conj(z));
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
            const cplx x = a.value(i, k), y = b.value(i, k);
            CHECK(std::abs(std::conj(x) - y) <= 1e-10 * std::abs(x));
        }
}

TEST_CASE("geometric grid arithmetic") {
    const auto g = geometric_grid(1e4, 1e8, 20);
    CHECK(g.size() == 81);
    CHECK(g.front() == 1e4);
    CHECK(g.back() == doctest::Approx(1e8).epsilon(1e-14));
    CHECK(geometric_grid(1, 10, 3).size() == 4);
    CHECK_THROWS(geometric_grid(10, 1, 3));
    CHECK_THROWS(geometric_grid(1, 10, 0));
}

TEST_CASE("grid evaluation on a finite source uses every interval") {
    std::mt19937_64 rng(9);
    const auto h = random_h(rng, 1000);
    ExplicitSource src(h);
    const auto grid = geometric_grid(1, 1e6, 2);
    TruncationPolicy p;
    p.threads = 3;
    const auto samples = log_abs_w22_grid(src, grid, p);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(samples[k].n_used == 1000);
        CHECK(samples[k].flags == 0);
        CHECK(samples[k].log_w22 == log_abs_w22(h, grid[k]));
    }
}

TEST_CASE("truncation rule with a closed-form tail") {
    PowerSource src(true);
    const auto grid = geometric_grid(1e2, 1e5, 1);
    const auto samples = log_abs_w22_grid(src, grid);
    for (const auto& s : samples) {
        CHECK(s.flags == 0);
        CHECK(s.tail_ratio <= 1e-3);
        // doubling the truncation moves the value by less than the tolerance
        const double doubled = log_abs_w22(src.materialize(2 * s.n_used), s.r);
        CHECK(std::abs(doubled - s.log_w22) <= 1e-3 * std::max(1.0, s.log_w22));
    }
}

TEST_CASE("doubling rule without a tail, and the budget flag") {
    PowerSource src(false);
    const auto grid = geometric_grid(1e2, 1e4, 1);
    const auto samples = log_abs_w22_grid(src, grid);
    for (const auto& s : samples) CHECK(s.flags == kFlagTailByDoubling);

    TruncationPolicy tight;
    tight.max_intervals = 1000;
    const auto limited = log_abs_w22_grid(PowerSource(true), geometric_grid(1e6, 1e7, 1), tight);
    for (const auto& s : limited) {
        CHECK((s.flags & kFlagTruncationLimited) != 0);
        CHECK(s.n_used == 1000);
        CHECK(s.tail_ratio > 1e-3);
    }
    CHECK(w22_flag_names(kFlagTruncationLimited | kFlagTailByDoubling) == "truncation-limited;tail-by-doubling");
}

TEST_CASE("threads do not change results") {
    PowerSource src(true);
    const auto grid = geometric_grid(1e2, 1e5, 4);
    TruncationPolicy one, many;
    many.threads = 4;
    const auto a = log_abs_w22_grid(src, grid, one), b = log_abs_w22_grid(src, grid, many);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(a[k].log_w22 == b[k].log_w22);
        CHECK(a[k].n_used == b[k].n_used);
    }
}
