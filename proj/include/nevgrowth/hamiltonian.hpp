#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nevgrowth {

// Angle jumps with |sin(phi_{j+1} - phi_j)| below this are rejected when only
// absolute angles are given. Steps passed explicitly only need sin(step) != 0.
inline constexpr double kMinAngleJump = 1e-14;

// Windows up to this many intervals use the exact-sign double sum for det Omega.
inline constexpr std::size_t kDoubleSumWidth = 512;

// Accumulated determinants with det/(O11*O22) below this fall back to the double sum.
inline constexpr double kCancellationGuard = 1e-10;

// Relative tolerance under which det Omega(s, x_N) is treated as equal to 1/r^2.
inline constexpr double kPartitionTie = 1e-12;

/// Piecewise constant rank-one Hamiltonian H = xi xi^T on consecutive
/// intervals of length l_j, xi = (cos phi_j, sin phi_j).
class HamburgerHamiltonian {
public:
    HamburgerHamiltonian() = default;
    HamburgerHamiltonian(std::vector<double> lengths, std::vector<double> angles);

    /// Angles given by phi_1 and the steps phi_{j+1} - phi_j. The steps are kept
    /// as given, so jumps far below the rounding of phi_j stay accurate.
    static HamburgerHamiltonian from_steps(std::vector<double> lengths, double first_angle,
                                           std::vector<double> steps);

    std::size_t size() const { return lengths_.size(); }
    std::span<const double> lengths() const { return lengths_; }
    std::span<const double> angles() const { return angles_; }
    double length(std::size_t j) const { return lengths_[j - 1]; }  // 1-based
    double angle(std::size_t j) const { return angles_[j - 1]; }    // 1-based
    std::span<const double> steps() const { return steps_; }
    double step(std::size_t j) const { return steps_[j - 1]; }      // phi_{j+1} - phi_j

    /// phi_k - phi_{m+1} for k = m+1..n, summed from the steps.
    std::vector<double> relative_angles(std::size_t m, std::size_t n) const;

    /// x_n = l_1 + ... + l_n, x_0 = 0.
    double node(std::size_t n) const;
    double total_length() const { return nodes_.back(); }
    std::span<const double> nodes() const { return nodes_; }

private:
    std::vector<double> lengths_;
    std::vector<double> angles_;
    std::vector<double> steps_;
    std::vector<double> nodes_;

    void finish(bool explicit_steps);
};

/// Omega(s,t) = integral of H over [s,t] with its determinant kept separately,
/// since forming O11*O22 - O12^2 loses the small determinants that matter.
struct OmegaMatrix {
    double o11 = 0, o12 = 0, o22 = 0;
    double det = 0;
    double trace() const { return o11 + o22; }
};

double node_position(const HamburgerHamiltonian& h, std::size_t n);

/// det Omega(x_m, x_n) = 1/2 sum_{j,k=m+1..n} l_j l_k sin^2(phi_j - phi_k).
double det_omega_nodes(const HamburgerHamiltonian& h, std::size_t m, std::size_t n);

/// Omega(x_m, x_n) with its determinant.
OmegaMatrix omega_nodes(const HamburgerHamiltonian& h, std::size_t m, std::size_t n);

/// det Omega(s,t) for arbitrary 0 <= s < t <= x_N; boundary intervals enter
/// with their fractional lengths.
double det_omega_real(const HamburgerHamiltonian& h, double s, double t);

/// The exact double sum over explicit pieces. Exposed for cross-checks.
double det_omega_double_sum(std::span<const double> lengths, std::span<const double> angles);

/// Compensated accumulation of Omega in the frame of the first angle.
/// Returns the determinant and writes det/(O11*O22) to guard_ratio.
double det_omega_accumulated(std::span<const double> lengths, std::span<const double> angles,
                             double* guard_ratio = nullptr);

/// b_j^{(s)} = det Omega(x_j, x_{j+s})^{-1/2}, j = 0..N-s.
std::vector<double> b_s_sequence(const HamburgerHamiltonian& h, std::size_t s);

/// sqrt det Omega(x_j, x_{j+s}) = 1/b_j^{(s)}, j = 0..N-s. Zero windows stay zero.
std::vector<double> window_sqrt_det(const HamburgerHamiltonian& h, std::size_t s);

struct SigmaPartition {
    std::vector<double> points;  // sigma_0 = 0 < ... < sigma_kappa = x_N
    std::size_t kappa = 0;
    std::size_t greedy = 0;      // number of windows with det >= 1/r^2
};

/// Points with det Omega(sigma_{k-1}, sigma_k) = 1/r^2 until the remainder has
/// det <= 1/r^2.
SigmaPartition sigma_partition(const HamburgerHamiltonian& h, double r);

/// Maximal number of consecutive disjoint windows with det Omega >= 1/r^2.
std::size_t greedy_partition_count(const HamburgerHamiltonian& h, double r);

}  // namespace nevgrowth
