#include "nevgrowth/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace nevgrowth {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double max_abs4(const std::array<cplx, 4>& m) {
    double best = 0;
    for (const cplx& v : m) best = std::max(best, std::abs(v));
    return best;
}

}  // namespace

ScaledMatrix2::ScaledMatrix2(cplx a11, cplx a12, cplx a21, cplx a22, double log_scale)
    : m_{a11, a12, a21, a22}, log_scale_(log_scale) {
    renormalize();
}

void ScaledMatrix2::renormalize() {
    const double m = max_abs4(m_);
    if (m == 0 || !std::isfinite(m)) {
        if (!std::isfinite(m)) throw std::overflow_error("non-finite matrix entry");
        log_scale_ = 0;
        return;
    }
    if (m >= 0.5 && m <= 1.0) return;
    int e = 0;
    std::frexp(m, &e);
    for (cplx& v : m_) v = cplx(std::ldexp(v.real(), -e), std::ldexp(v.imag(), -e));
    log_scale_ += e * kLn2;
}

cplx ScaledMatrix2::value(int i, int j) const { return normalized(i, j) * std::exp(log_scale_); }

double ScaledMatrix2::log_abs(int i, int j) const { return std::log(std::abs(normalized(i, j))) + log_scale_; }

cplx ScaledMatrix2::det_normalized() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

double ScaledMatrix2::max_abs() const { return max_abs4(m_); }

ScaledMatrix2 ScaledMatrix2::operator*(const ScaledMatrix2& rhs) const {
    const auto& a = m_;
    const auto& b = rhs.m_;
    return ScaledMatrix2(a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
                         a[2] * b[1] + a[3] * b[3], log_scale_ + rhs.log_scale_);
}

ScaledMatrix2 interval_factor(double l, double phi, cplx z) {
    if (!(l > 0)) throw std::invalid_argument("interval length must be positive");
    const double c = std::cos(phi), s = std::sin(phi);
    const cplx zl = z * l;
    // xi xi^T J = [[cs, -c^2], [s^2, -cs]]
    return ScaledMatrix2(1.0 - zl * (c * s), zl * (c * c), -zl * (s * s), 1.0 + zl * (c * s));
}

namespace {

// Scales a row so its largest entry lies in [1/2, 1); returns the binary exponent removed.
int normalize_pair(cplx& a, cplx& b) {
    const double m = std::max(std::abs(a), std::abs(b));
    if (m == 0) return 0;
    int e = 0;
    std::frexp(m, &e);
    a = cplx(std::ldexp(a.real(), -e), std::ldexp(a.imag(), -e));
    b = cplx(std::ldexp(b.real(), -e), std::ldexp(b.imag(), -e));
    return e;
}

}  // namespace

void Monodromy::apply(double l, double c, double s, cplx z) {
    const cplx zl = z * l;
    auto& q = q_;
    const cplx v1 = q[0] * c + q[1] * s;
    const cplx v2 = q[2] * c + q[3] * s;
    const cplx p11 = q[0] - zl * v1 * s, p12 = q[1] + zl * v1 * c;
    const cplx p21 = q[2] - zl * v2 * s, p22 = q[3] + zl * v2 * c;

    // RQ step: P = T Q' with T upper triangular and Q' unitary.
    const double t22 = std::hypot(std::abs(p21), std::abs(p22));
    const cplx n21 = p21 / t22, n22 = p22 / t22;
    const cplx t12 = p11 * std::conj(n21) + p12 * std::conj(n22);
    // det P = det Q because the interval factor has unit determinant.
    const cplx det_q = q[0] * q[3] - q[1] * q[2];
    const cplx t11 = det_q / t22;

    // u11 keeps its own exponent: it shrinks against u12 over long products,
    // and the determinant needs it after it stops mattering for the entries.
    cplx r11 = u11_ * t11;
    cplx r12 = u11_row() * t12 + u12_ * t22;
    cplx r22 = u22_ * t22;
    cplx zero(0);
    e11_ += normalize_pair(r11, zero);
    u11_ = r11;
    cplx lead = u11_row();
    e1_ += normalize_pair(lead, r12);
    e2_ += normalize_pair(r22, zero);
    u12_ = r12;
    u22_ = r22;
    q = {std::conj(n22), -std::conj(n21), n21, n22};
}

cplx Monodromy::u11_row() const {
    const int k = static_cast<int>(std::clamp<std::int64_t>(e11_ - e1_, -2000, 2000));
    return cplx(std::ldexp(u11_.real(), k), std::ldexp(u11_.imag(), k));
}

cplx Monodromy::entry_normalized(int i, int j, std::int64_t* exponent) const {
    const std::size_t jj = static_cast<std::size_t>(j);
    if (i == 0) {
        if (exponent) *exponent = e1_;
        return u11_row() * q_[jj] + u12_ * q_[2 + jj];
    }
    if (exponent) *exponent = e2_;
    return u22_ * q_[2 + jj];
}

double Monodromy::log_abs(int i, int j) const {
    std::int64_t e = 0;
    const cplx v = entry_normalized(i, j, &e);
    return std::log(std::abs(v)) + static_cast<double>(e) * kLn2;
}

cplx Monodromy::value(int i, int j) const {
    std::int64_t e = 0;
    const cplx v = entry_normalized(i, j, &e);
    return cplx(std::ldexp(v.real(), static_cast<int>(e)), std::ldexp(v.imag(), static_cast<int>(e)));
}

double Monodromy::log_abs_det() const {
    const cplx det_q = q_[0] * q_[3] - q_[1] * q_[2];
    return std::log(std::abs(u11_)) + std::log(std::abs(u22_)) + std::log(std::abs(det_q)) +
           static_cast<double>(e11_ + e2_) * kLn2;
}

cplx Monodromy::det_phase() const {
    const cplx d = u11_ * u22_ * (q_[0] * q_[3] - q_[1] * q_[2]);
    return d / std::abs(d);
}

cplx Monodromy::determinant() const { return std::exp(log_abs_det()) * det_phase(); }

ScaledMatrix2 Monodromy::scaled() const {
    std::int64_t e1 = 0, e2 = 0;
    cplx row1[2] = {entry_normalized(0, 0, &e1), entry_normalized(0, 1, &e1)};
    cplx row2[2] = {entry_normalized(1, 0, &e2), entry_normalized(1, 1, &e2)};
    const std::int64_t top = std::max(e1, e2);
    auto shift = [](cplx v, std::int64_t d) {
        const int k = static_cast<int>(std::max<std::int64_t>(d, -2000));
        return cplx(std::ldexp(v.real(), k), std::ldexp(v.imag(), k));
    };
    return ScaledMatrix2(shift(row1[0], e1 - top), shift(row1[1], e1 - top), shift(row2[0], e2 - top),
                         shift(row2[1], e2 - top), static_cast<double>(top) * kLn2);
}

Monodromy monodromy(const HamburgerHamiltonian& h, cplx z) {
    Monodromy w;
    for (std::size_t j = 0; j < h.size(); ++j) {
        const double phi = h.angles()[j];
        w.apply(h.lengths()[j], std::cos(phi), std::sin(phi), z);
    }
    return w;
}

void RowPropagator::rescale() {
    const double m = std::max(std::max(std::abs(ar_), std::abs(ai_)), std::max(std::abs(br_), std::abs(bi_)));
    if (m == 0) return;
    int e = 0;
    std::frexp(m, &e);
    ar_ = std::ldexp(ar_, -e);
    ai_ = std::ldexp(ai_, -e);
    br_ = std::ldexp(br_, -e);
    bi_ = std::ldexp(bi_, -e);
    exponent_ += e;
}

double RowPropagator::log_abs_w22() const {
    return std::log(std::hypot(br_, bi_)) + static_cast<double>(exponent_) * kLn2;
}

double RowPropagator::log_abs_w21() const {
    return std::log(std::hypot(ar_, ai_)) + static_cast<double>(exponent_) * kLn2;
}

double log_abs_w22(const HamburgerHamiltonian& h, double r) {
    if (!(r > 0)) throw std::domain_error("r must be positive");
    RowPropagator row(cplx(0, r));
    for (std::size_t j = 0; j < h.size(); ++j) {
        const double phi = h.angles()[j];
        row.apply(h.lengths()[j], std::cos(phi), std::sin(phi));
    }
    return row.log_abs_w22();
}

std::vector<double> geometric_grid(double r_lo, double r_hi, unsigned per_decade) {
    if (!(r_lo > 0) || !(r_hi >= r_lo) || !std::isfinite(r_hi))
        throw std::invalid_argument("r-range must be positive and increasing");
    if (per_decade == 0) throw std::invalid_argument("points per decade must be positive");
    const double decades = std::log10(r_hi / r_lo);
    const auto steps = static_cast<std::size_t>(std::floor(decades * per_decade + 1e-9));
    std::vector<double> grid(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        grid[k] = r_lo * std::pow(10.0, static_cast<double>(k) / per_decade);
    return grid;
}

std::string w22_flag_names(unsigned flags) {
    std::string out;
    auto add = [&](const char* name) {
        if (!out.empty()) out += ';';
        out += name;
    };
    if (flags & kFlagTruncationLimited) add("truncation-limited");
    if (flags & kFlagTailByDoubling) add("tail-by-doubling");
    return out;
}

namespace {

struct GridSlot {
    std::size_t index;
    double r;
    RowPropagator row;
    double last_checkpoint_value = 0;
    double last_change = 0;
    bool has_checkpoint = false;
};

// Evaluates a subset of grid points in one pass over the source.
void evaluate_slots(const HamiltonianSource& src, std::vector<GridSlot> slots, const TruncationPolicy& policy,
                    std::vector<W22Sample>& out) {
    const auto finite = src.size();
    const bool analytic = !finite && src.length_tail(0).has_value();
    auto stream = src.open();
    Interval iv;
    std::size_t n = 0;
    constexpr std::size_t kCheckStride = 256;
    std::size_t next_doubling = std::max<std::size_t>(policy.min_intervals, 1);

    auto finish = [&](GridSlot& slot, unsigned flags, double ratio) {
        W22Sample& s = out[slot.index];
        s.r = slot.r;
        s.log_w22 = slot.row.log_abs_w22();
        s.n_used = n;
        s.flags = flags;
        s.tail_ratio = ratio;
    };

    while (!slots.empty()) {
        const bool budget_hit = !finite && n >= policy.max_intervals;
        if (budget_hit || !stream->next(iv)) {
            for (GridSlot& slot : slots) {
                unsigned flags = 0;
                double ratio = 0;
                if (budget_hit) {
                    flags |= kFlagTruncationLimited;
                    if (analytic) {
                        const double v = std::max(1.0, slot.row.log_abs_w22());
                        ratio = slot.r * *src.length_tail(n) / v;
                    } else {
                        flags |= kFlagTailByDoubling;
                        ratio = slot.last_change;
                    }
                }
                finish(slot, flags, ratio);
            }
            break;
        }
        ++n;
        const double c = std::cos(iv.angle), s = std::sin(iv.angle);
        for (GridSlot& slot : slots) slot.row.apply(iv.length, c, s);
        if (finite || n < policy.min_intervals) continue;

        if (analytic && n % kCheckStride == 0) {
            const double tail = *src.length_tail(n);
            for (std::size_t k = 0; k < slots.size();) {
                const double v = std::max(1.0, slots[k].row.log_abs_w22());
                const double ratio = slots[k].r * tail / v;
                if (ratio <= policy.rel_tol) {
                    finish(slots[k], 0, ratio);
                    slots[k] = std::move(slots.back());
                    slots.pop_back();
                } else {
                    ++k;
                }
            }
        } else if (!analytic && n == next_doubling) {
            for (std::size_t k = 0; k < slots.size();) {
                const double v = slots[k].row.log_abs_w22();
                bool done = false;
                double change = 0;
                if (slots[k].has_checkpoint) {
                    change = std::abs(v - slots[k].last_checkpoint_value) / std::max(1.0, std::abs(v));
                    done = change <= policy.rel_tol;
                }
                slots[k].last_checkpoint_value = v;
                slots[k].last_change = change;
                slots[k].has_checkpoint = true;
                if (done) {
                    finish(slots[k], kFlagTailByDoubling, change);
                    slots[k] = std::move(slots.back());
                    slots.pop_back();
                } else {
                    ++k;
                }
            }
            next_doubling *= 2;
        }
    }
}

}  // namespace

std::vector<W22Sample> log_abs_w22_grid(const HamiltonianSource& src, std::span<const double> r,
                                        const TruncationPolicy& policy) {
    for (double v : r)
        if (!(v > 0) || !std::isfinite(v)) throw std::domain_error("r must be positive and finite");
    std::vector<W22Sample> out(r.size());
    unsigned threads = policy.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : policy.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(r.size(), 1)));

    std::vector<std::vector<GridSlot>> parts(threads);
    for (std::size_t k = 0; k < r.size(); ++k)
        parts[k % threads].push_back(GridSlot{k, r[k], RowPropagator(cplx(0, r[k]))});

    if (threads == 1) {
        evaluate_slots(src, std::move(parts[0]), policy, out);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                evaluate_slots(src, std::move(parts[t]), policy, out);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace nevgrowth
