#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nevgrowth {

enum class ExponentMethod { ratio_limsup, counting_slope, exact_power };

const char* exponent_method_name(ExponentMethod m);
std::optional<ExponentMethod> parse_exponent_method(const std::string& name);

struct ExponentEstimate {
    double value = 0;
    ExponentMethod method = ExponentMethod::counting_slope;
    std::size_t window_lo = 0;  // 1-based ranks in the sorted sequence
    std::size_t window_hi = 0;
    double residual = 0;        // rms of the regression, or spread of the ratios
    double cutoff = 0;          // values above this were dropped as possibly incomplete
};

// Shortest sequence accepted by the estimators.
inline constexpr std::size_t kMinExponentLength = 64;

/// Estimate of inf{a : sum lambda_n^{-a} < inf} for a positive sequence.
/// Values above the smallest entry of the last tenth of the input are discarded,
/// since smaller values may still follow beyond the truncation.
ExponentEstimate convergence_exponent(std::span<const double> seq, ExponentMethod method);

/// Closed form 1/power for lambda_n comparable to n^power.
ExponentEstimate exact_power_exponent(double power);

struct LpSum {
    double log_value = 0;  // log sum seq_j^p; -inf for an empty sum
    double value = 0;      // exp(log_value); 0 only when the sum underflows
    std::size_t argmax = 0;
};

/// sum seq_j^p evaluated in log space.
LpSum lp_sum(std::span<const double> seq, double p);

/// zeta(s, q) = sum_{k>=0} (q+k)^{-s}, s > 1, q > 0.
double hurwitz_zeta(double s, double q);

enum class Support { all, even, odd, squares, nonsquares };

const char* support_name(Support s);

/// Sum of terms coeff * j^{-power} restricted to disjoint index sets.
class PowerLaw {
public:
    struct Term {
        Support support = Support::all;
        double coeff = 1;
        double power = 1;
    };

    PowerLaw() = default;
    explicit PowerLaw(std::vector<Term> terms);

    double value(std::size_t j) const;
    /// sum_{j>n} value(j); +inf when some term is not summable.
    double tail(std::size_t n) const;
    /// The law of value(j)^p (terms have disjoint supports, so powers distribute).
    PowerLaw pow(double p) const;
    const std::vector<Term>& terms() const { return terms_; }
    /// Slowest decay rate over all terms.
    double min_power() const;

private:
    std::vector<Term> terms_;
};

struct TailSum {
    double value = 0;
    bool truncation_only = true;  // no closed form was available
};

/// sum_{j>n} seq_j over the stored values (1-based j).
TailSum tail_sum(std::span<const double> seq, std::size_t n);
/// sum_{j>n} from the closed form.
TailSum tail_sum(const PowerLaw& law, std::size_t n);

enum class TailVerdict { summable, divergent, inconclusive };

const char* tail_verdict_name(TailVerdict v);

/// Decade diagnostic for a series of nonnegative terms from its partial sums
/// S_N, S_{N/10}, S_{N/100}, S_{N/1000}.
struct TailDiagnostic {
    TailVerdict verdict = TailVerdict::inconclusive;
    std::size_t n = 0;
    double sum = 0;
    double last_decade = 0;
    double previous_decade = 0;
    double third_decade = 0;
};

TailDiagnostic classify_decades(std::size_t n, double s_n, double s_n10, double s_n100, double s_n1000);

/// Same, with partial[k] = sum of the first k terms (partial[0] = 0).
TailDiagnostic classify_partial_sums(std::span<const double> partial);

/// Nonnegative terms folded into the decade checkpoints without storing them.
class DecadeAccumulator {
public:
    explicit DecadeAccumulator(std::size_t n);
    void add(double term);
    TailDiagnostic result() const;
    double sum() const;

private:
    std::size_t n_;
    std::size_t count_ = 0;
    double sum_ = 0, comp_ = 0;
    double checkpoints_[3] = {0, 0, 0};  // S_{n/1000}, S_{n/100}, S_{n/10}
};

}  // namespace nevgrowth
