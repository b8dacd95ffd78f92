#include "nevgrowth/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nevgrowth/monodromy.hpp"
#include "numeric_util.hpp"

namespace nevgrowth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRescaleHigh = 1e150;
constexpr double kRescaleLow = 1e-150;

// Orthogonal polynomials at zero, advanced one index per Jacobi pair.
class Recurrence {
public:
    // (p, q) at the current index, sharing exponent e.
    double p = 1, q = 0;
    std::int64_t e = 0;
    std::size_t index = 0;

    // Moves from u_n to u_{n+1} using a_n, b_n. Returns K_{n+1,n} scaled by 2^-(e_n + e_{n+1}).
    double step(double a, double b) {
        if (!(b > 0) || !std::isfinite(b)) throw std::domain_error("b_" + std::to_string(index) + " must be positive");
        if (!std::isfinite(a)) throw std::domain_error("a_" + std::to_string(index) + " must be finite");
        // b_{n-1} u_{n-1} rewritten in the exponent of u_n; the n = 0 step uses
        // b_{-1} p_{-1} = 0 and b_{-1} q_{-1} = -1.
        double bp_prev, bq_prev;
        if (index == 0) {
            bp_prev = 0;
            bq_prev = std::ldexp(-1.0, static_cast<int>(-e));
        } else {
            const int shift = static_cast<int>(std::clamp<std::int64_t>(e_prev_ - e, -4000, 4000));
            bp_prev = b_prev_ * std::ldexp(p_prev_, shift);
            bq_prev = b_prev_ * std::ldexp(q_prev_, shift);
        }
        const double np = -(a * p + bp_prev) / b;
        const double nq = -(a * q + bq_prev) / b;
        p_prev_ = p;
        q_prev_ = q;
        e_prev_ = e;
        b_prev_ = b;
        p = np;
        q = nq;
        const double m = std::max(std::abs(p), std::abs(q));
        if (m == 0 || !std::isfinite(m))
            throw std::runtime_error("orthogonal polynomials vanish together at n = " + std::to_string(index + 1) +
                                     " (internal inconsistency)");
        if (m > kRescaleHigh || m < kRescaleLow) {
            int k = 0;
            std::frexp(m, &k);
            p = std::ldexp(p, -k);
            q = std::ldexp(q, -k);
            e += k;
        }
        ++index;
        return std::ldexp(1.0 / b, static_cast<int>(std::clamp<std::int64_t>(-(e + e_prev_), -4000, 4000)));
    }

    // Dot product of the previous and current (p, q), scaled like step()'s return.
    double dot_with_previous() const { return p_prev_ * p + q_prev_ * q; }

private:
    double p_prev_ = 0, q_prev_ = 0, b_prev_ = 0;
    std::int64_t e_prev_ = 0;
};

// Angle from u_n to u_{n+1} reduced to (-pi/2, pi/2]; xi xi^T only sees phi mod pi,
// and near-pi jumps written as pi - t would lose t.
double reduced_jump(double cross, double dot) { return dot == 0 ? kPi / 2 : std::atan(cross / dot); }

double length_of(double p, double q, std::int64_t e, std::size_t n) {
    const double l = std::ldexp(p * p + q * q, static_cast<int>(std::clamp<std::int64_t>(2 * e, -4000, 4000)));
    if (!(l > 0) || !std::isfinite(l))
        throw std::domain_error("length l_" + std::to_string(n) + " leaves the double range");
    return l;
}

}  // namespace

JacobiParameters::JacobiParameters(std::vector<double> a_in, std::vector<double> b_in)
    : a(std::move(a_in)), b(std::move(b_in)) {
    if (a.size() != b.size()) throw std::invalid_argument("a and b differ in size");
    for (std::size_t n = 0; n < b.size(); ++n) {
        if (!(b[n] > 0) || !std::isfinite(b[n]))
            throw std::domain_error("b_" + std::to_string(n) + " must be positive and finite");
        if (!std::isfinite(a[n])) throw std::domain_error("a_" + std::to_string(n) + " must be finite");
    }
}

double PolyAtZero::p(std::size_t n) const { return std::ldexp(p_[n], static_cast<int>(e_[n])); }
double PolyAtZero::q(std::size_t n) const { return std::ldexp(q_[n], static_cast<int>(e_[n])); }

double PolyAtZero::log_norm2(std::size_t n) const {
    return std::log(p_[n] * p_[n] + q_[n] * q_[n]) + 2.0 * static_cast<double>(e_[n]) * std::numbers::ln2;
}

void PolyAtZero::push(double p, double q, std::int64_t e) {
    p_.push_back(p);
    q_.push_back(q);
    e_.push_back(e);
}

PolyAtZero poly_at_zero(const JacobiParameters& j) {
    if (j.size() == 0) throw std::invalid_argument("poly_at_zero needs N >= 1");
    PolyAtZero out;
    Recurrence rec;
    out.push(rec.p, rec.q, rec.e);
    for (std::size_t n = 0; n < j.size(); ++n) {
        rec.step(j.a[n], j.b[n]);
        out.push(rec.p, rec.q, rec.e);
    }
    out.set_parameters(j);
    return out;
}

HamburgerHamiltonian jacobi_to_hamiltonian(const JacobiParameters& j) {
    if (j.size() == 0) throw std::invalid_argument("bridge needs N >= 1");
    std::vector<double> lengths{1.0}, steps;
    lengths.reserve(j.size() + 1);
    steps.reserve(j.size());
    Recurrence rec;
    for (std::size_t n = 0; n < j.size(); ++n) {
        const double cross = rec.step(j.a[n], j.b[n]);
        // angle between (-q_n, p_n) and (-q_{n+1}, p_{n+1}); the cross product is 1/b_n > 0
        const double jump = reduced_jump(cross, rec.dot_with_previous());
        if (!(jump != 0)) throw std::runtime_error("angle jump vanished at n = " + std::to_string(n));
        steps.push_back(jump);
        lengths.push_back(length_of(rec.p, rec.q, rec.e, n + 2));
    }
    return HamburgerHamiltonian::from_steps(std::move(lengths), kPi / 2, std::move(steps));
}

JacobiParameters hamiltonian_to_jacobi(const HamburgerHamiltonian& h) {
    const std::size_t n_int = h.size();
    if (n_int < 3) throw std::invalid_argument("hamiltonian_to_jacobi needs at least 3 intervals");
    if (std::abs(h.length(1) - 1.0) > 1e-12 || std::abs(std::cos(h.angle(1))) > 1e-12)
        throw std::domain_error("Hamiltonian is not bridge-normalized (needs l_1 = 1, phi_1 = pi/2)");
    const std::size_t n = n_int - 1;
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s21 = std::sin(h.step(k + 1));
        b[k] = 1.0 / (std::sqrt(h.length(k + 1) * h.length(k + 2)) * std::abs(s21));
        if (k == 0) {
            // tan(pi/2 + t) = -cot t
            a[0] = -1.0 / std::tan(h.step(1));
        } else {
            const double s10 = std::sin(h.step(k));
            const double s20 = std::sin(h.step(k) + h.step(k + 1));
            a[k] = -s20 / (h.length(k + 1) * s21 * s10);
        }
    }
    return JacobiParameters(std::move(a), std::move(b));
}

double bridge_round_trip_error(const JacobiParameters& j) {
    const JacobiParameters back = hamiltonian_to_jacobi(jacobi_to_hamiltonian(j));
    double worst = 0;
    for (std::size_t n = 0; n < j.size(); ++n) {
        worst = std::max(worst, std::abs(back.b[n] - j.b[n]) / j.b[n]);
        worst = std::max(worst, std::abs(back.a[n] - j.a[n]) / std::max(1.0, std::abs(j.a[n])));
    }
    return worst;
}

namespace {

// K_{i,k} for i = k..n, from the recurrence in i.
void kernel_column(const JacobiParameters& j, std::size_t k, std::size_t n, std::vector<double>& col) {
    col.assign(n + 1, 0.0);
    if (k >= n) return;
    col[k + 1] = 1.0 / j.b[k];
    for (std::size_t i = k + 1; i < n; ++i) col[i + 1] = -(j.a[i] * col[i] + j.b[i - 1] * col[i - 1]) / j.b[i];
}

}  // namespace

double k_kernel(const PolyAtZero& pq, std::size_t j, std::size_t k) {
    if (j >= pq.size() || k >= pq.size()) throw std::out_of_range("kernel index beyond truncation");
    if (j == k) return 0;
    if (j < k) return -k_kernel(pq, k, j);
    const JacobiParameters& par = pq.parameters();
    if (par.size() >= j) {
        double prev = 0, cur = 1.0 / par.b[k];
        for (std::size_t i = k + 1; i < j; ++i) {
            const double next = -(par.a[i] * cur + par.b[i - 1] * prev) / par.b[i];
            prev = cur;
            cur = next;
        }
        return cur;
    }
    const double m = pq.q_mantissa(j) * pq.p_mantissa(k) - pq.p_mantissa(j) * pq.q_mantissa(k);
    return std::ldexp(m, static_cast<int>(pq.exponent(j) + pq.exponent(k)));
}

namespace {

// sum_{j,k<n} K_jk^2 = 2 [(sum q^2)(sum p^2) - (sum p q)^2].
double k_square_sum_moments(const PolyAtZero& pq, std::size_t n) {
    detail::NeumaierSum pp, qq, pqs;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = pq.p(i), q = pq.q(i);
        pp.add(p * p);
        qq.add(q * q);
        pqs.add(p * q);
    }
    return 2 * detail::det2_sym(qq.value(), pqs.value(), pp.value());
}

double k_square_sum_brute(const PolyAtZero& pq, std::size_t n) {
    // K is antisymmetric, so twice the sum below the diagonal
    detail::NeumaierSum acc;
    std::vector<double> col;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (pq.parameters().size() >= n) {
            kernel_column(pq.parameters(), k, n - 1, col);
            for (std::size_t j = k + 1; j < n; ++j) acc.add(2 * col[j] * col[j]);
        } else {
            for (std::size_t j = k + 1; j < n; ++j) {
                const double v = k_kernel(pq, j, k);
                acc.add(2 * v * v);
            }
        }
    }
    return acc.value();
}

double k_square_sum(const PolyAtZero& pq, std::size_t n) {
    return n <= 256 ? k_square_sum_brute(pq, n) : k_square_sum_moments(pq, n);
}

}  // namespace

IndeterminacyReport indeterminacy_diagnostic(const JacobiParameters& j) {
    if (j.size() < 2) throw std::invalid_argument("indeterminacy diagnostic needs N >= 2");
    const PolyAtZero pq = poly_at_zero(j);
    IndeterminacyReport rep;
    const std::size_t n = j.size();
    rep.n = n;
    rep.k_square_sum = k_square_sum(pq, n);
    const HamburgerHamiltonian h = jacobi_to_hamiltonian(j);
    rep.two_det_omega = 2 * det_omega_nodes(h, 0, n);
    rep.relative_gap = std::abs(rep.k_square_sum - rep.two_det_omega) / std::max(rep.two_det_omega, 1e-300);
    rep.identity_holds = rep.relative_gap <= 1e-8;
    rep.tail = classify_decades(n, rep.k_square_sum, k_square_sum(pq, n / 10), k_square_sum(pq, n / 100),
                                k_square_sum(pq, n / 1000));
    return rep;
}

std::vector<double> b3_sequence(const JacobiParameters& j) {
    if (j.size() < 2) throw std::invalid_argument("b3 sequence needs N >= 2");
    std::vector<double> out(j.size() - 1);
    for (std::size_t n = 0; n + 1 < j.size(); ++n) {
        const double bn = j.b[n], bn1 = j.b[n + 1], a = j.a[n + 1];
        const double scale = std::max({std::abs(a), bn, bn1});
        out[n] = (bn / scale) * bn1 / std::hypot(a / scale, std::hypot(bn / scale, bn1 / scale));
    }
    return out;
}

CarlemanSum carleman_sum(const JacobiParameters& j, std::size_t n) {
    if (n > j.size()) throw std::out_of_range("carleman_sum range exceeds the parameters");
    DecadeAccumulator acc(n);
    for (std::size_t k = 0; k < n; ++k) acc.add(1.0 / j.b[k]);
    return CarlemanSum{acc.sum(), acc.result()};
}

namespace {

class VectorJacobiStream final : public JacobiStream {
public:
    explicit VectorJacobiStream(const JacobiParameters& j) : j_(j) {}
    bool next(double& a, double& b) override {
        if (pos_ >= j_.size()) return false;
        a = j_.a[pos_];
        b = j_.b[pos_];
        ++pos_;
        return true;
    }

private:
    const JacobiParameters& j_;
    std::size_t pos_ = 0;
};

}  // namespace

std::unique_ptr<JacobiStream> stream_of(const JacobiParameters& j) { return std::make_unique<VectorJacobiStream>(j); }

const char* berezanskii_verdict_name(BerezanskiiVerdict v) {
    switch (v) {
        case BerezanskiiVerdict::satisfied: return "hypotheses numerically satisfied";
        case BerezanskiiVerdict::violated: return "hypotheses violated";
        case BerezanskiiVerdict::inconclusive: return "inconclusive";
    }
    return "?";
}

BerezanskiiReport berezanskii_check(JacobiStream& s, std::size_t n) {
    if (n < 3) throw std::invalid_argument("berezanskii_check needs N >= 3");
    BerezanskiiReport rep;
    rep.n = n;
    DecadeAccumulator inv_b(n), variation(n - 2), regularity(n - 2);
    std::vector<double> bs;
    bs.reserve(n);
    const std::size_t tenth_start = n - std::max<std::size_t>(1, n / 10);
    double beta_sum = 0, beta_min = 0, beta_max = 0;
    std::size_t beta_count = 0;

    double a = 0, b = 0;
    double log_b_prev2 = 0, log_b_prev = 0, beta_prev = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!s.next(a, b)) throw std::out_of_range("Jacobi stream ended before N parameters");
        if (!(b > 0) || !std::isfinite(b)) throw std::domain_error("b_" + std::to_string(k) + " must be positive");
        const double lb = std::log(b);
        bs.push_back(b);
        inv_b.add(1.0 / b);
        if (k >= 1) {
            const double beta = -a / (2 * std::exp(0.5 * (log_b_prev + lb)));
            if (k >= 2) variation.add(std::abs(beta - beta_prev));
            if (k >= tenth_start) {
                if (beta_count == 0) beta_min = beta_max = beta;
                beta_min = std::min(beta_min, beta);
                beta_max = std::max(beta_max, beta);
                beta_sum += beta;
                ++beta_count;
            }
            beta_prev = beta;
        }
        if (k >= 2) regularity.add(std::abs(std::expm1(log_b_prev - 0.5 * (log_b_prev2 + lb))));
        log_b_prev2 = log_b_prev;
        log_b_prev = lb;
    }
    rep.inverse_b = inv_b.result();
    rep.beta_variation = variation.result();
    rep.regularity = regularity.result();
    rep.beta_limit = beta_count ? beta_sum / static_cast<double>(beta_count) : 0;
    rep.beta_spread = beta_max - beta_min;
    rep.beta_limit_inside = std::abs(rep.beta_limit) + rep.beta_spread / 2 < 1;
    const bool clearly_outside = std::abs(rep.beta_limit) - rep.beta_spread / 2 >= 1;

    const TailVerdict v[3] = {rep.inverse_b.verdict, rep.beta_variation.verdict, rep.regularity.verdict};
    const bool all_summable = std::all_of(v, v + 3, [](TailVerdict t) { return t == TailVerdict::summable; });
    const bool any_divergent = std::any_of(v, v + 3, [](TailVerdict t) { return t == TailVerdict::divergent; });
    if (any_divergent || clearly_outside)
        rep.verdict = BerezanskiiVerdict::violated;
    else if (all_summable && rep.beta_limit_inside)
        rep.verdict = BerezanskiiVerdict::satisfied;

    if (bs.size() >= kMinExponentLength) rep.predicted_order = convergence_exponent(bs, ExponentMethod::counting_slope);
    return rep;
}

BerezanskiiReport berezanskii_check(const JacobiParameters& j) {
    auto s = stream_of(j);
    return berezanskii_check(*s, j.size());
}

namespace {

class BridgeStream final : public IntervalStream {
public:
    explicit BridgeStream(std::unique_ptr<JacobiStream> src) : src_(std::move(src)) { phi_.add(kPi / 2); }
    bool next(Interval& out) override {
        if (first_) {
            first_ = false;
            out.length = 1.0;
            out.angle = kPi / 2;
            return true;
        }
        double a = 0, b = 0;
        if (!src_->next(a, b)) return false;
        const double cross = rec_.step(a, b);
        out.length = length_of(rec_.p, rec_.q, rec_.e, rec_.index + 1);
        out.step = reduced_jump(cross, rec_.dot_with_previous());
        phi_.add(out.step);
        out.angle = phi_.value();
        return true;
    }

private:
    std::unique_ptr<JacobiStream> src_;
    Recurrence rec_;
    detail::NeumaierSum phi_;
    bool first_ = true;
};

}  // namespace

JacobiHamiltonianSource::JacobiHamiltonianSource(JacobiStreamFactory factory, std::optional<std::size_t> size,
                                                 std::string name)
    : factory_(std::move(factory)), size_(size), name_(std::move(name)) {}

std::unique_ptr<IntervalStream> JacobiHamiltonianSource::open() const {
    return std::make_unique<BridgeStream>(factory_());
}

double nevanlinna_logB(const JacobiParameters& j, double r) { return log_abs_w22(jacobi_to_hamiltonian(j), r); }

}  // namespace nevgrowth
