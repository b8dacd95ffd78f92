#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nevgrowth/hamiltonian.hpp"
#include "nevgrowth/source.hpp"

namespace nevgrowth {

using cplx = std::complex<double>;

/// Complex 2x2 matrix stored as exp(log_scale) * M with max |M_ij| in [1/2, 1].
/// Scaling uses powers of two, so renormalization itself is exact.
class ScaledMatrix2 {
public:
    ScaledMatrix2() = default;  // identity
    ScaledMatrix2(cplx a11, cplx a12, cplx a21, cplx a22, double log_scale = 0);

    cplx normalized(int i, int j) const { return m_[static_cast<std::size_t>(2 * i + j)]; }
    double log_scale() const { return log_scale_; }
    /// Entry value; overflows for large log_scale.
    cplx value(int i, int j) const;
    double log_abs(int i, int j) const;
    /// Determinant of the normalized entries.
    cplx det_normalized() const;
    double max_abs() const;

    ScaledMatrix2 operator*(const ScaledMatrix2& rhs) const;

private:
    void renormalize();
    std::array<cplx, 4> m_{cplx(1), cplx(0), cplx(0), cplx(1)};
    double log_scale_ = 0;
};

/// I - z l xi xi^T J with xi = (cos phi, sin phi); exact over one interval.
ScaledMatrix2 interval_factor(double l, double phi, cplx z);

/// Running product W = diag(2^e1, 2^e2) * U * Q with U upper triangular and Q
/// unitary. Row scales are kept apart because the rows of W become nearly
/// parallel as it grows; the factorization keeps det W = 2^(e1+e2) u11 u22 det Q
/// accurate where a single common scale would lose it to cancellation.
class Monodromy {
public:
    Monodromy() = default;  // identity

    /// W <- W * (I - z l xi xi^T J), xi = (c, s).
    void apply(double l, double c, double s, cplx z);

    cplx entry_normalized(int i, int j, std::int64_t* exponent) const;
    double log_abs(int i, int j) const;
    /// exp(log_abs) with the phase of the entry; overflows when the entry does.
    cplx value(int i, int j) const;
    double log_abs_w22() const { return log_abs(1, 1); }

    /// log|det W| and det W / |det W|.
    double log_abs_det() const;
    cplx det_phase() const;
    /// det W evaluated through the factorization (1 in exact arithmetic).
    cplx determinant() const;

    ScaledMatrix2 scaled() const;

private:
    std::array<cplx, 4> q_{cplx(1), cplx(0), cplx(0), cplx(1)};
    cplx u11_{1}, u12_{0}, u22_{1};
    std::int64_t e1_ = 0, e2_ = 0;
    std::int64_t e11_ = 0;  // exponent of u11_ alone

    cplx u11_row() const;  // u11 in the scale of the first row
};

Monodromy monodromy(const HamburgerHamiltonian& h, cplx z);

/// log|w_22(ir)| over all intervals of h.
double log_abs_w22(const HamburgerHamiltonian& h, double r);

/// Second row of W propagated alone; it carries w_22 and costs a quarter of the full product.
class RowPropagator {
public:
    explicit RowPropagator(cplx z) : z_(z) {}
    void apply(double l, double c, double s) {
        const double zr = z_.real() * l, zi = z_.imag() * l;
        const double ur = ar_ * c + br_ * s, ui = ai_ * c + bi_ * s;
        const double tr = zr * ur - zi * ui, ti = zr * ui + zi * ur;
        ar_ -= tr * s;
        ai_ -= ti * s;
        br_ += tr * c;
        bi_ += ti * c;
        const double m = std::max(std::max(std::abs(ar_), std::abs(ai_)), std::max(std::abs(br_), std::abs(bi_)));
        if (m > kHigh || m < kLow) rescale();
    }
    double log_abs_w22() const;
    double log_abs_w21() const;

private:
    void rescale();
    static constexpr double kHigh = 0x1p+400;
    static constexpr double kLow = 0x1p-400;
    cplx z_;
    double ar_ = 0, ai_ = 0, br_ = 1, bi_ = 0;  // (w21, w22)
    std::int64_t exponent_ = 0;
};

enum W22Flag : unsigned {
    kFlagTruncationLimited = 1u << 0,  // budget reached before the truncation rule held
    kFlagTailByDoubling = 1u << 1,     // no closed-form tail; doubling rule used
};

struct TruncationPolicy {
    double rel_tol = 1e-3;                  // r * tail <= rel_tol * max(1, log|w22|)
    std::size_t max_intervals = 1u << 25;   // budget for unbounded sources
    std::size_t min_intervals = 64;
    unsigned threads = 1;
};

struct W22Sample {
    double r = 0;
    double log_w22 = 0;
    std::size_t n_used = 0;
    unsigned flags = 0;
    double tail_ratio = 0;  // achieved r*tail/max(1, value), or the last doubling change
};

/// log|w_22(ir)| on a grid. Finite sources use every interval; unbounded
/// sources are truncated per r by the rule in TruncationPolicy.
std::vector<W22Sample> log_abs_w22_grid(const HamiltonianSource& src, std::span<const double> r,
                                        const TruncationPolicy& policy = {});

/// 10^(k/per_decade) steps from r_lo through r_hi.
std::vector<double> geometric_grid(double r_lo, double r_hi, unsigned per_decade);

std::string w22_flag_names(unsigned flags);

}  // namespace nevgrowth
