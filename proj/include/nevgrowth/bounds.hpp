#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nevgrowth/exponents.hpp"
#include "nevgrowth/hamiltonian.hpp"

namespace nevgrowth {

enum class BoundMethod { lower_count, lower_k4, upper_k26, upper_k89, upper_k66, upper_k79, upper_k49, upper_holder };

const char* bound_method_name(BoundMethod m);
std::optional<BoundMethod> parse_bound_method(const std::string& name);
bool is_upper(BoundMethod m);

enum BoundFlag : unsigned {
    kBoundTruncationLimited = 1u << 0,   // an inverse or count saturated at the truncation
    kBoundTruncationOnly = 1u << 1,      // some tail beyond the truncation had no closed form
    kBoundEmptySet = 1u << 2,            // h(r) defining set empty; summed from the first index
    kBoundHypothesisViolated = 1u << 3,  // sampled or summability hypothesis failed
    kBoundDegenerate = 1u << 4,          // a factor vanished
    kBoundLiteralInverse = 1u << 5,      // min{N : F(N) < r}
    kBoundGeInverse = 1u << 6,           // min{N : F(N) >= r}
    kBoundOutOfDomain = 1u << 7,         // r outside the range where the formula is defined
    kBoundDriftTailBounded = 1u << 8,    // sin^2 <= 1 used for the tail beyond the truncation
};

std::string bound_flag_names(unsigned flags);

struct BoundSample {
    double r = 0;
    double value = 0;
    unsigned flags = 0;
};

struct BoundCurve {
    BoundMethod method = BoundMethod::lower_count;
    std::vector<BoundSample> samples;
    std::vector<std::pair<std::string, double>> meta;
    unsigned flags = 0;  // union of the sample flags and curve-level flags
};

/// A stored truncation plus whatever is known about the part beyond it.
struct HamiltonianData {
    HamburgerHamiltonian h;
    bool complete = true;                // h is the whole Hamiltonian
    std::optional<PowerLaw> length_law;  // l_j
    std::optional<PowerLaw> step_law;    // |sin(phi_{j+1} - phi_j)|, indexed by j
    std::optional<PowerLaw> drift_law;   // upper law for l_j sin^2(phi_j - drift_psi)
    double drift_psi = 0;
};

/// k(r) = floor(#{j : b_j^(s) <= r} / s).
BoundCurve lower_count_curve(const HamiltonianData& d, std::size_t s, std::span<const double> r);

/// (r/s) sum_{j >= h(r)} f_j with f_j = sqrt det Omega(x_j, x_{j+s}) and
/// h(r) = 1 + max{j : f_j > 1/r}.
BoundCurve lower_k4_curve(const HamiltonianData& d, std::size_t s, std::span<const double> r);

struct K26Params {
    std::vector<double> f, g;  // f_0..f_M, g_0..g_M, nondecreasing
    double f_limit = 0, g_limit = 0;
    double nu = 0.5, gamma = 0.5, delta = 0.5, k = 1;
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
};

/// (K/nu) r^{2 nu} (f_inf - f_0)^gamma (g_inf - g_0)^delta, after sampling
/// det Omega(x_m, x_n)^nu <= K (f_n - f_m)^gamma (g_n - g_m)^delta on random pairs.
BoundCurve upper_k26_curve(const HamiltonianData& d, const K26Params& p, std::span<const double> r);

/// r^{1/(a+b)} 2 (a+b) (sum l^{1/a})^{a/(a+b)} (1 + sum |sin dphi|^{1/b})^{b/(a+b)}.
BoundCurve upper_k89_curve(const HamiltonianData& d, double alpha, double beta, std::span<const double> r);

/// G^-(log r / sqrt r) log r with G(N) = N^{-1} (sum_{j>N} l_j)^{1/2} (sum_{j>N} |sin dphi_j|)^{1/2}.
BoundCurve upper_k66_curve(const HamiltonianData& d, std::span<const double> r);

/// r^{2/(a+w)} (a+w) (sum l^{1/a})^{a/(a+w)} (sum (l sin^2(phi - psi))^{1/w})^{w/(a+w)}.
BoundCurve upper_k79_curve(const HamiltonianData& d, double alpha, double omega, double psi,
                           std::span<const double> r);

/// (r F^-(r)^{1-b})^{1/(a+1)} with
/// F(N) = N^{(1-b)/a} [(sum_{j>N} l_j)(sum_{j>N} l_j sin^2(phi_j - psi))]^{-(a+1)/(2a)}.
/// Without psi the angle factor is bounded by 1. The literal inverse is
/// min{N : F(N) < r}; ge_inverse selects min{N : F(N) >= r}.
BoundCurve upper_k49_curve(const HamiltonianData& d, double alpha, double beta, std::optional<double> psi,
                           bool ge_inverse, std::span<const double> r);

/// upper-k26 specialised to Hoelder angles, |phi_{m+1} - phi_n| <= dc |x_m - x_n|^a: f = g = x_n,
/// nu = 1/(2(1+a)), K = dc^{1/(1+a)}. Without dc the smallest constant over
/// sampled pairs is used.
BoundCurve upper_holder_curve(const HamiltonianData& d, double alpha, std::optional<double> dc,
                              std::span<const double> r, std::uint64_t seed = 1);

/// Named parameters for dispatch from the command line.
struct MethodSpec {
    BoundMethod method = BoundMethod::lower_count;
    std::vector<std::pair<std::string, double>> params;
    std::optional<double> get(const std::string& key) const;
};

/// Parses "lower-count:s=2,upper-k89:alpha=2,beta=1"; greek names are accepted
/// for the parameters.
std::vector<MethodSpec> parse_method_list(const std::string& text);

BoundCurve evaluate_bound(const HamiltonianData& d, const MethodSpec& spec, std::span<const double> r,
                          std::uint64_t seed = 1);

struct OrderBox {
    double lower = 0;
    double upper = 1;
    std::string lower_method;
    std::string upper_method;
    std::string branch;
};

struct OrderBoxParams {
    double alpha0 = 0, beta0 = 0, omega0 = 0;  // k104, k94, k91, k74 cases
    double alpha = 0, nu = 0, beta = 0, gamma = 0;  // mixed-peaks cases
};

/// Closed-form order pair. case_tag: k104, k94, k91, k74,
/// mixed-peaks-case1 .. mixed-peaks-case4.
OrderBox order_box(const std::string& case_tag, const OrderBoxParams& p);

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double residual = 0;  // rms
    std::size_t points = 0;
};

/// Least squares of log(value) against log(r) over samples with positive value.
LineFit loglog_fit(std::span<const double> r, std::span<const double> value);
LineFit curve_slope(const BoundCurve& c, double r_min = 0);

}  // namespace nevgrowth
