#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nevgrowth/bounds.hpp"
#include "nevgrowth/hamiltonian.hpp"
#include "nevgrowth/jacobi.hpp"
#include "nevgrowth/monodromy.hpp"
#include "nevgrowth/source.hpp"

namespace nevgrowth {

enum class FamilyKind { pure_power, alternating_power, mixed_peaks, berezanskii_power, explicit_lists };

const char* family_kind_name(FamilyKind k);

/// Diagonal of the Berezanskii family: a_n = 0, a_n = t, or a_n = -2 t sqrt(b_{n-1} b_n)
/// (so that beta_n = t).
enum class DiagonalProfile { zero, constant, beta };

const char* diagonal_profile_name(DiagonalProfile p);

struct FamilySpec {
    FamilyKind kind = FamilyKind::pure_power;
    double alpha = 0, beta = 0;      // pure-power, mixed-peaks, berezanskii (beta only)
    double alpha0 = 0, alpha1 = 0;   // alternating-power
    double nu = 0, gamma = 0;        // mixed-peaks
    int mixed_case = 0;              // mixed-peaks: 1..4
    double psi = 0;                  // limit direction of converging angles
    DiagonalProfile diagonal = DiagonalProfile::zero;
    double diagonal_value = 0;
    std::optional<HamburgerHamiltonian> lists;  // explicit-lists
    std::string preset;                         // name it was parsed from, if any

    /// Throws std::domain_error on parameter violations.
    void validate() const;
    bool is_jacobi() const { return kind == FamilyKind::berezanskii_power; }
};

/// "pure-power:alpha=1.5,beta=1.5", "alternating-power:a0=2,a1=3",
/// "mixed-peaks:alpha=2,nu=3,beta=0.5,case=3", "berezanskii:beta=2,a=zero",
/// "two-interval". Unset parameters take documented defaults.
FamilySpec parse_preset(const std::string& text);

/// Canonical text that parse_preset maps back to the same spec.
std::string preset_string(const FamilySpec& s);

/// Unbounded interval source for a family (finite for explicit lists).
std::unique_ptr<HamiltonianSource> make_source(const FamilySpec& s);

/// First n intervals.
HamburgerHamiltonian generate(const FamilySpec& s, std::size_t n);

/// First n Jacobi parameters of the Berezanskii family.
JacobiParameters generate_jacobi(const FamilySpec& s, std::size_t n);
std::unique_ptr<JacobiStream> jacobi_stream(const FamilySpec& s);

/// Truncation of length n together with the closed-form laws of the family.
HamiltonianData family_data(const FamilySpec& s, std::size_t n);

/// Realized rates of the constructed angles: slopes of -log|sin dphi_j| and of
/// -log max_{k>=j} |sin(phi_k - psi)| against log j over the last three decades.
struct AngleValidation {
    double step_rate = 0;
    double step_target = 0;
    double drift_rate = 0;
    double drift_target = 0;
    std::size_t n = 0;
};

AngleValidation validate_angles(const FamilySpec& s, std::size_t n);

struct OrderFit {
    double slope = 0;
    double intercept = 0;
    double residual = 0;
    double r_lo = 0, r_hi = 0;
    std::vector<W22Sample> samples;
    unsigned flags = 0;  // union of the sample flags
};

/// Least-squares slope of log log|w_22(ir)| against log r on a geometric grid.
OrderFit order_fit(const HamiltonianSource& src, double r_lo, double r_hi, unsigned per_decade = 20,
                   const TruncationPolicy& policy = {});

struct SandwichRow {
    BoundCurve curve;
    LineFit fit;
    bool eligible = false;  // counts towards the best lower or upper slope
};

struct BranchValue {
    std::string branch;
    double value = 0;
    bool applies = false;
};

struct SandwichReport {
    FamilySpec spec;
    unsigned per_decade = 20;
    std::size_t bound_intervals = 0;
    OrderFit actual;
    std::vector<SandwichRow> rows;
    double best_lower = 0;
    std::string best_lower_method;
    double best_upper = 1;
    std::string best_upper_method;
    std::optional<OrderBox> box;
    std::string box_case;
    std::vector<BranchValue> branch_table;
    std::optional<AngleValidation> angles;
    std::optional<BerezanskiiReport> berezanskii;
    double tolerance = 0.05;
    bool lower_ok = false;  // best lower <= actual + tolerance
    bool upper_ok = false;  // actual <= best upper + tolerance
};

struct SandwichOptions {
    unsigned per_decade = 20;
    std::size_t bound_intervals = std::size_t{1} << 20;
    double epsilon = 0.02;  // exponents of the upper bounds sit this far inside the admissible range
    TruncationPolicy policy{};
    std::uint64_t seed = 1;
};

SandwichReport sandwich_report(const FamilySpec& s, double r_lo, double r_hi, const SandwichOptions& opt = {});

/// Reports as JSON text and the curves as CSV (r, logw22, N_used, flags, one column per bound).
std::string family_json(const FamilySpec& s);
std::string report_json(const SandwichReport& rep);
std::string report_csv(const SandwichReport& rep);

}  // namespace nevgrowth
