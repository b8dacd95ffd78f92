#include "nevgrowth/source.hpp"

#include <cmath>

#include "numeric_util.hpp"

namespace nevgrowth {

HamburgerHamiltonian HamiltonianSource::materialize(std::size_t n) const {
    if (const auto total = size()) n = std::min(n, *total);
    std::vector<double> lengths, angles, steps;
    lengths.reserve(n);
    angles.reserve(n);
    auto stream = open();
    Interval iv;
    bool exact_steps = true;
    while (lengths.size() < n && stream->next(iv)) {
        if (!lengths.empty()) {
            exact_steps = exact_steps && std::isfinite(iv.step);
            steps.push_back(iv.step);
        }
        lengths.push_back(iv.length);
        angles.push_back(iv.angle);
    }
    if (exact_steps && !angles.empty())
        return HamburgerHamiltonian::from_steps(std::move(lengths), angles.front(), std::move(steps));
    return HamburgerHamiltonian(std::move(lengths), std::move(angles));
}

namespace {

class ExplicitStream final : public IntervalStream {
public:
    explicit ExplicitStream(const HamburgerHamiltonian& h) : h_(h) {}
    bool next(Interval& out) override {
        if (pos_ >= h_.size()) return false;
        out.length = h_.lengths()[pos_];
        out.angle = h_.angles()[pos_];
        out.step = pos_ > 0 ? h_.steps()[pos_ - 1] : std::numeric_limits<double>::quiet_NaN();
        ++pos_;
        return true;
    }

private:
    const HamburgerHamiltonian& h_;
    std::size_t pos_ = 0;
};

}  // namespace

ExplicitSource::ExplicitSource(HamburgerHamiltonian h) : h_(std::move(h)), suffix_(h_.size() + 1, 0.0) {
    detail::NeumaierSum acc;
    for (std::size_t j = h_.size(); j-- > 0;) {
        acc.add(h_.lengths()[j]);
        suffix_[j] = acc.value();
    }
}

std::unique_ptr<IntervalStream> ExplicitSource::open() const { return std::make_unique<ExplicitStream>(h_); }

std::optional<double> ExplicitSource::length_tail(std::size_t n) const {
    return n >= h_.size() ? 0.0 : suffix_[n];
}

}  // namespace nevgrowth
