#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nevgrowth/hamiltonian.hpp"

namespace nevgrowth {

struct Interval {
    double length = 0;
    double angle = 0;
    // angle minus the previous angle, exact when the source knows it; NaN otherwise
    double step = std::numeric_limits<double>::quiet_NaN();
};

/// Sequential reader over the intervals of a (possibly unbounded) Hamiltonian.
class IntervalStream {
public:
    virtual ~IntervalStream() = default;
    /// Writes the next interval; returns false once a finite source is exhausted.
    virtual bool next(Interval& out) = 0;
};

/// A Hamiltonian given by a rule rather than by stored lists. Streams are
/// independent, so one source can feed several threads.
class HamiltonianSource {
public:
    virtual ~HamiltonianSource() = default;
    virtual std::unique_ptr<IntervalStream> open() const = 0;
    /// Number of intervals, or nullopt for an unbounded family.
    virtual std::optional<std::size_t> size() const = 0;
    /// sum_{j>n} l_j in closed form, when the rule provides one.
    virtual std::optional<double> length_tail(std::size_t /*n*/) const { return std::nullopt; }
    virtual std::string describe() const = 0;

    /// First n intervals as a stored Hamiltonian (all of them for finite sources if n exceeds size).
    HamburgerHamiltonian materialize(std::size_t n) const;
};

/// Stored lists viewed as a source; the tail is the exact suffix sum.
class ExplicitSource final : public HamiltonianSource {
public:
    explicit ExplicitSource(HamburgerHamiltonian h);
    std::unique_ptr<IntervalStream> open() const override;
    std::optional<std::size_t> size() const override { return h_.size(); }
    std::optional<double> length_tail(std::size_t n) const override;
    std::string describe() const override { return "explicit"; }
    const HamburgerHamiltonian& hamiltonian() const { return h_; }

private:
    HamburgerHamiltonian h_;
    std::vector<double> suffix_;
};

}  // namespace nevgrowth
