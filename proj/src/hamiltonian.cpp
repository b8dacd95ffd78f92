#include "nevgrowth/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "numeric_util.hpp"

namespace nevgrowth {

HamburgerHamiltonian::HamburgerHamiltonian(std::vector<double> lengths, std::vector<double> angles)
    : lengths_(std::move(lengths)), angles_(std::move(angles)) {
    if (lengths_.size() != angles_.size())
        throw std::invalid_argument("lengths and angles differ in size");
    steps_.resize(angles_.empty() ? 0 : angles_.size() - 1);
    for (std::size_t j = 0; j < steps_.size(); ++j) steps_[j] = angles_[j + 1] - angles_[j];
    finish(false);
}

HamburgerHamiltonian HamburgerHamiltonian::from_steps(std::vector<double> lengths, double first_angle,
                                                      std::vector<double> steps) {
    if (lengths.empty() ? !steps.empty() : steps.size() + 1 != lengths.size())
        throw std::invalid_argument("need one step fewer than lengths");
    HamburgerHamiltonian h;
    h.lengths_ = std::move(lengths);
    h.steps_ = std::move(steps);
    h.angles_.resize(h.lengths_.size());
    if (!h.angles_.empty()) {
        detail::NeumaierSum phi;
        phi.add(first_angle);
        h.angles_[0] = first_angle;
        for (std::size_t j = 0; j < h.steps_.size(); ++j) {
            phi.add(h.steps_[j]);
            h.angles_[j + 1] = phi.value();
        }
    }
    h.finish(true);
    return h;
}

void HamburgerHamiltonian::finish(bool explicit_steps) {
    const double floor = explicit_steps ? 0.0 : kMinAngleJump;
    for (std::size_t j = 0; j < lengths_.size(); ++j) {
        if (!(lengths_[j] > 0) || !std::isfinite(lengths_[j]))
            throw std::domain_error("length l_" + std::to_string(j + 1) + " is not a positive finite number");
        if (!std::isfinite(angles_[j]))
            throw std::domain_error("angle phi_" + std::to_string(j + 1) + " is not finite");
        if (j > 0 && !(std::abs(std::sin(steps_[j - 1])) > floor))
            throw std::domain_error("angles phi_" + std::to_string(j) + " and phi_" + std::to_string(j + 1) +
                                    " coincide modulo pi");
    }
    nodes_.resize(lengths_.size() + 1);
    nodes_[0] = 0;
    detail::NeumaierSum x;
    for (std::size_t j = 0; j < lengths_.size(); ++j) {
        x.add(lengths_[j]);
        nodes_[j + 1] = x.value();
    }
}

std::vector<double> HamburgerHamiltonian::relative_angles(std::size_t m, std::size_t n) const {
    if (m >= n || n > size()) throw std::out_of_range("relative_angles window outside the truncation");
    std::vector<double> rel(n - m);
    rel[0] = 0;
    for (std::size_t k = 1; k < rel.size(); ++k) rel[k] = rel[k - 1] + steps_[m + k - 1];
    return rel;
}

double HamburgerHamiltonian::node(std::size_t n) const {
    if (n >= nodes_.size()) throw std::out_of_range("node index " + std::to_string(n) + " beyond truncation");
    return nodes_[n];
}

double node_position(const HamburgerHamiltonian& h, std::size_t n) { return h.node(n); }

double det_omega_double_sum(std::span<const double> lengths, std::span<const double> angles) {
    detail::NeumaierSum acc;
    const std::size_t w = lengths.size();
    for (std::size_t j = 0; j < w; ++j) {
        for (std::size_t k = j + 1; k < w; ++k) {
            const double s = std::sin(angles[j] - angles[k]);
            acc.add(lengths[j] * lengths[k] * s * s);
        }
    }
    return acc.value();
}

namespace {

// Moments of Omega in a frame rotated by psi0.
struct FrameMoments {
    detail::NeumaierSum a, b, c;  // sum l cos^2, sum l sin cos, sum l sin^2
};

FrameMoments accumulate(std::span<const double> lengths, std::span<const double> angles, double psi0) {
    FrameMoments m;
    for (std::size_t j = 0; j < lengths.size(); ++j) {
        const double th = angles[j] - psi0;
        const double s = std::sin(th), c = std::cos(th);
        m.a.add(lengths[j] * c * c);
        m.b.add(lengths[j] * s * c);
        m.c.add(lengths[j] * s * s);
    }
    return m;
}

}  // namespace

double det_omega_accumulated(std::span<const double> lengths, std::span<const double> angles,
                             double* guard_ratio) {
    if (lengths.empty()) {
        if (guard_ratio) *guard_ratio = 0;
        return 0;
    }
    const FrameMoments m = accumulate(lengths, angles, angles[0]);
    const double a = m.a.value(), b = m.b.value(), c = m.c.value();
    const double det = std::max(0.0, detail::det2_sym(a, b, c));
    if (guard_ratio) *guard_ratio = (a > 0 && c > 0) ? det / (a * c) : 0;
    return det;
}

namespace {

// Beyond this width the quadratic fallback is replaced by a second pass in the
// principal frame of Omega, where the off-diagonal moment nearly vanishes.
constexpr std::size_t kDoubleSumFallbackWidth = 4096;

double det_principal_frame(std::span<const double> lengths, std::span<const double> angles) {
    const FrameMoments m0 = accumulate(lengths, angles, angles[0]);
    const double a = m0.a.value(), b = m0.b.value(), c = m0.c.value();
    const double psi = angles[0] + 0.5 * std::atan2(2 * b, a - c);
    const FrameMoments m = accumulate(lengths, angles, psi);
    return std::max(0.0, detail::det2_sym(m.a.value(), m.b.value(), m.c.value()));
}

double det_pieces(std::span<const double> lengths, std::span<const double> angles) {
    if (lengths.size() < 2) return 0;
    if (lengths.size() <= kDoubleSumWidth) return det_omega_double_sum(lengths, angles);
    double ratio = 0;
    const double det = det_omega_accumulated(lengths, angles, &ratio);
    if (ratio >= kCancellationGuard) return det;
    if (lengths.size() <= kDoubleSumFallbackWidth) return det_omega_double_sum(lengths, angles);
    return det_principal_frame(lengths, angles);
}

void check_window(const HamburgerHamiltonian& h, std::size_t m, std::size_t n) {
    if (m >= n) throw std::invalid_argument("det Omega window needs m < n");
    if (n > h.size()) throw std::out_of_range("det Omega window exceeds truncation");
}

}  // namespace

double det_omega_nodes(const HamburgerHamiltonian& h, std::size_t m, std::size_t n) {
    check_window(h, m, n);
    return det_pieces(h.lengths().subspan(m, n - m), h.relative_angles(m, n));
}

OmegaMatrix omega_nodes(const HamburgerHamiltonian& h, std::size_t m, std::size_t n) {
    check_window(h, m, n);
    std::vector<double> ang = h.relative_angles(m, n);
    for (double& a : ang) a += h.angle(m + 1);
    const FrameMoments mm = accumulate(h.lengths().subspan(m, n - m), ang, 0.0);
    OmegaMatrix out;
    out.o11 = mm.a.value();
    out.o12 = mm.b.value();
    out.o22 = mm.c.value();
    out.det = det_omega_nodes(h, m, n);
    return out;
}

double det_omega_real(const HamburgerHamiltonian& h, double s, double t) {
    const auto nodes = h.nodes();
    const double xn = nodes.back();
    if (!(s < t)) throw std::invalid_argument("det_omega_real needs s < t");
    if (s < 0 || t > xn) throw std::out_of_range("det_omega_real endpoints outside [0, x_N]");
    // interval i (1-based) covers (x_{i-1}, x_i]
    const std::size_t is = static_cast<std::size_t>(std::upper_bound(nodes.begin(), nodes.end(), s) - nodes.begin());
    const std::size_t it = static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), t) - nodes.begin());
    if (is >= it) return 0;  // both endpoints in one rank-one interval
    std::vector<double> len(h.lengths().begin() + static_cast<std::ptrdiff_t>(is - 1),
                            h.lengths().begin() + static_cast<std::ptrdiff_t>(it));
    std::vector<double> ang = h.relative_angles(is - 1, it);
    len.front() = nodes[is] - s;
    len.back() = t - nodes[it - 1];
    return det_pieces(len, ang);
}

std::vector<double> window_sqrt_det(const HamburgerHamiltonian& h, std::size_t s) {
    if (s < 2) throw std::invalid_argument("window size s must be at least 2");
    if (h.size() < s) throw std::out_of_range("window exceeds truncation");
    const std::size_t count = h.size() - s + 1;
    std::vector<double> out(count), rel(s);
    const auto steps = h.steps();
    for (std::size_t j = 0; j < count; ++j) {
        for (std::size_t k = 1; k < s; ++k) rel[k] = rel[k - 1] + steps[j + k - 1];
        out[j] = std::sqrt(det_omega_double_sum(h.lengths().subspan(j, s), rel));
    }
    return out;
}

std::vector<double> b_s_sequence(const HamburgerHamiltonian& h, std::size_t s) {
    std::vector<double> out = window_sqrt_det(h, s);
    for (double& v : out) v = 1.0 / v;
    return out;
}

namespace {

// One left-to-right pass producing the sigma points. Each window keeps its
// determinant as a sum of nonnegative increments l_new * sum_j l_j sin^2(phi_new - phi_j).
SigmaPartition sweep(const HamburgerHamiltonian& h, double r, bool keep_points) {
    if (!(r > 0)) throw std::invalid_argument("r must be positive");
    const double target = 1.0 / (r * r);
    const std::size_t n = h.size();
    SigmaPartition out;
    if (keep_points) out.points.push_back(0.0);
    if (n == 0) {
        out.kappa = 1;
        if (keep_points) out.points.push_back(0.0);
        return out;
    }

    std::size_t found = 0;
    std::size_t i = 1;              // current interval
    double consumed = 0;            // part of interval i already assigned to earlier windows
    while (true) {
        // new window starting at x_{i-1} + consumed
        detail::NeumaierSum a, b, c, det;
        bool crossed = false;
        double th = 0;  // phi_k - phi_i
        for (std::size_t k = i; k <= n; ++k) {
            const double len = (k == i) ? h.length(k) - consumed : h.length(k);
            if (k > i) th += h.step(k - 1);
            const double sn = std::sin(th), cs = std::cos(th);
            const double cross = std::max(0.0, a.value() * sn * sn - 2 * b.value() * sn * cs + c.value() * cs * cs);
            const double before = det.value();
            const double after = before + len * cross;
            const bool last = (k == n);
            if (last && after <= target * (1 + kPartitionTie)) {
                if (after >= target * (1 - kPartitionTie)) ++out.greedy;
                break;
            }
            if (after >= target && cross > 0) {
                const double tau = std::clamp((target - before) / cross, 0.0, len);
                const double offset = (k == i ? consumed : 0.0) + tau;
                ++found;
                ++out.greedy;
                if (keep_points) out.points.push_back(h.node(k - 1) + offset);
                i = k;
                consumed = offset;
                crossed = true;
                break;
            }
            det.add(len * cross);
            a.add(len * cs * cs);
            b.add(len * sn * cs);
            c.add(len * sn * sn);
        }
        if (!crossed) break;
        if (consumed >= h.length(i)) {
            // the crossing landed on a node
            if (i == n) break;
            ++i;
            consumed = 0;
        }
    }
    out.kappa = found + 1;
    if (keep_points) out.points.push_back(h.total_length());
    return out;
}

}  // namespace

SigmaPartition sigma_partition(const HamburgerHamiltonian& h, double r) { return sweep(h, r, true); }

std::size_t greedy_partition_count(const HamburgerHamiltonian& h, double r) { return sweep(h, r, false).greedy; }

}  // namespace nevgrowth
