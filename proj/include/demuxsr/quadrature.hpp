#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "demuxsr/errors.hpp"

namespace demuxsr {

/// Adaptive composite Simpson integration of f over [a, b] to an absolute
/// tolerance. Throws accuracy_error when the recursion limit is reached
/// before the tolerance is met.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-10,
                          int max_depth = 48) {
    struct Helper {
        F& f;
        double tol_floor;
        double recurse(double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m);
            const double rm = 0.5 * (m + b);
            const double flm = f(lm);
            const double frm = f(rm);
            const double h = b - a;
            const double left = h / 12.0 * (fa + 4.0 * flm + fm);
            const double right = h / 12.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (std::abs(delta) <= 15.0 * tol)
                return left + right + delta / 15.0;
            if (depth <= 0)
                throw accuracy_error(
                    "integrate_adaptive: tolerance not reached");
            const double child_tol = std::max(0.5 * tol, tol_floor);
            return recurse(a, m, fa, flm, fm, left, child_tol, depth - 1) +
                   recurse(m, b, fm, frm, fb, right, child_tol, depth - 1);
        }
    };
    if (!(b > a)) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    Helper helper{f, abs_tol * 1e-3};
    return helper.recurse(a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

/// Trapezoidal rule on a uniform grid.
inline double integrate_trapezoid(const std::vector<double>& values,
                                  double step) {
    if (values.size() < 2) return 0.0;
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * step;
}

}  // namespace demuxsr
