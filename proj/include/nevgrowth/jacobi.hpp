#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nevgrowth/exponents.hpp"
#include "nevgrowth/hamiltonian.hpp"
#include "nevgrowth/source.hpp"

namespace nevgrowth {

/// Diagonal a_n and off-diagonal b_n > 0, n = 0..N-1.
struct JacobiParameters {
    std::vector<double> a;
    std::vector<double> b;

    JacobiParameters() = default;
    JacobiParameters(std::vector<double> a, std::vector<double> b);
    std::size_t size() const { return b.size(); }
};

/// p_n(0), q_n(0) for n = 0..N. Each pair shares a binary exponent so that
/// p_n = p_mantissa(n) * 2^exponent(n) stays representable.
class PolyAtZero {
public:
    std::size_t size() const { return p_.size(); }
    double p_mantissa(std::size_t n) const { return p_[n]; }
    double q_mantissa(std::size_t n) const { return q_[n]; }
    std::int64_t exponent(std::size_t n) const { return e_[n]; }
    /// Plain values; these under/overflow where the mantissa form does not.
    double p(std::size_t n) const;
    double q(std::size_t n) const;
    double log_norm2(std::size_t n) const;  // log(p_n^2 + q_n^2)

    void push(double p, double q, std::int64_t e);

    /// Parameters the values came from; k_kernel runs the recurrence with them.
    const JacobiParameters& parameters() const { return params_; }
    void set_parameters(JacobiParameters j) { params_ = std::move(j); }

private:
    std::vector<double> p_, q_;
    std::vector<std::int64_t> e_;
    JacobiParameters params_;
};

/// Three-term recurrence b_n u_{n+1} + a_n u_n + b_{n-1} u_{n-1} = 0 with
/// p_0 = 1, p_1 = -a_0/b_0, q_0 = 0, q_1 = 1/b_0.
PolyAtZero poly_at_zero(const JacobiParameters& j);

/// l_{n+1} = p_n^2 + q_n^2, (sin, cos) phi_{n+1} = (p_n, -q_n)/sqrt(l_{n+1}),
/// with phi_{n+1} - phi_n reduced modulo pi to (-pi/2, pi/2]. N parameters give N+1 intervals.
HamburgerHamiltonian jacobi_to_hamiltonian(const JacobiParameters& j);

/// Inverse of jacobi_to_hamiltonian; needs l_1 = 1, phi_1 = pi/2 and N >= 3.
/// An N-interval Hamiltonian gives N-1 parameter pairs.
JacobiParameters hamiltonian_to_jacobi(const HamburgerHamiltonian& h);

/// Largest relative deviation of hamiltonian_to_jacobi(jacobi_to_hamiltonian(j)) from j.
double bridge_round_trip_error(const JacobiParameters& j);

/// K_jk = q_j(0) p_k(0) - p_j(0) q_k(0). With parameters attached, computed
/// by walking the recurrence in j from K_kk = 0, K_{k+1,k} = 1/b_k, which avoids
/// the cancellation of the product form once p, q grow.
double k_kernel(const PolyAtZero& pq, std::size_t j, std::size_t k);

struct IndeterminacyReport {
    std::size_t n = 0;
    double k_square_sum = 0;    // sum_{j,k<N} K_jk^2
    double two_det_omega = 0;   // 2 det Omega(0, x_N) of the bridged Hamiltonian
    double relative_gap = 0;
    bool identity_holds = false;  // relative gap <= 1e-8
    TailDiagnostic tail;          // decade diagnostic of N -> sum_{j,k<N} K_jk^2
};

IndeterminacyReport indeterminacy_diagnostic(const JacobiParameters& j);

/// b_n^(3) = b_n b_{n+1} / sqrt(a_{n+1}^2 + b_n^2 + b_{n+1}^2), n = 0..N-2.
std::vector<double> b3_sequence(const JacobiParameters& j);

struct CarlemanSum {
    double value = 0;
    TailDiagnostic tail;
};

/// sum_{n<N} 1/b_n.
CarlemanSum carleman_sum(const JacobiParameters& j, std::size_t n);

/// Sequential reader of (a_n, b_n).
class JacobiStream {
public:
    virtual ~JacobiStream() = default;
    virtual bool next(double& a, double& b) = 0;
};

using JacobiStreamFactory = std::function<std::unique_ptr<JacobiStream>()>;

std::unique_ptr<JacobiStream> stream_of(const JacobiParameters& j);

enum class BerezanskiiVerdict { satisfied, violated, inconclusive };

const char* berezanskii_verdict_name(BerezanskiiVerdict v);

struct BerezanskiiReport {
    std::size_t n = 0;
    TailDiagnostic inverse_b;       // sum 1/b_n
    TailDiagnostic beta_variation;  // sum |beta_{n+1} - beta_n|
    TailDiagnostic regularity;      // sum |b_n / sqrt(b_{n-1} b_{n+1}) - 1|
    double beta_limit = 0;          // mean of beta_n over the last tenth
    double beta_spread = 0;         // max - min of beta_n over the last tenth
    bool beta_limit_inside = false;
    BerezanskiiVerdict verdict = BerezanskiiVerdict::inconclusive;
    ExponentEstimate predicted_order;  // convergence exponent of (b_n)
};

/// beta_n = -a_n / (2 sqrt(b_{n-1} b_n)) and the three summability conditions
/// on the first n parameters of the stream.
BerezanskiiReport berezanskii_check(JacobiStream& s, std::size_t n);
BerezanskiiReport berezanskii_check(const JacobiParameters& j);

/// Hamiltonian intervals of a Jacobi stream, produced on the fly. Angles are
/// returned in (-pi, pi] rather than accumulated, so long streams keep their
/// precision; only their value modulo pi enters H.
class JacobiHamiltonianSource final : public HamiltonianSource {
public:
    JacobiHamiltonianSource(JacobiStreamFactory factory, std::optional<std::size_t> size, std::string name);
    std::unique_ptr<IntervalStream> open() const override;
    std::optional<std::size_t> size() const override { return size_; }
    std::string describe() const override { return name_; }

private:
    JacobiStreamFactory factory_;
    std::optional<std::size_t> size_;
    std::string name_;
};

/// log|B(ir)| = log|w_22(ir)| of the bridged Hamiltonian.
double nevanlinna_logB(const JacobiParameters& j, double r);

}  // namespace nevgrowth
