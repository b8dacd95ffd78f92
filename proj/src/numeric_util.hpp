#pragma once

#include <cmath>

namespace nevgrowth::detail {

// Neumaier's variant of compensated summation.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0;
    double comp_ = 0;
};

// a*c - b*b with the product b*b recovered exactly through fma.
inline double det2_sym(double a, double b, double c) {
    const double bb = b * b;
    const double err = std::fma(b, b, -bb);
    return std::fma(a, c, -bb) - err;
}

}  // namespace nevgrowth::detail
