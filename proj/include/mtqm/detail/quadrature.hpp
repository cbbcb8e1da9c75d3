#pragma once

#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace mtqm {

namespace detail {

// Positions this close to a lattice node (relative to h) are treated as the node.
inline constexpr double snap_tolerance = 1e-9;

inline long lattice_ceil(double x)
{
    const double r = std::round(x);
    if (std::abs(x - r) < snap_tolerance)
        return static_cast<long>(r);
    return static_cast<long>(std::ceil(x));
}

inline long lattice_floor(double x)
{
    const double r = std::round(x);
    if (std::abs(x - r) < snap_tolerance)
        return static_cast<long>(r);
    return static_cast<long>(std::floor(x));
}

template <class F, class V>
V simpson_cell(F& f, double a, double b, const V& fa, const V& fb)
{
    return (fa + f(0.5 * (a + b)) * 4.0 + fb) * ((b - a) / 6.0);
}

} // namespace detail

template <class F>
auto integrate_lattice(F&& f, double a, double b, double anchor, double h)
{
    using V = std::decay_t<decltype(f(a))>;
    if (!(a <= b))
        throw DomainError("integrate: reversed bounds");
    if (!(h > 0.0))
        throw DomainError("integrate: spacing must be positive");
    if (b - a < detail::snap_tolerance * h)
        return V{};

    const long ka = detail::lattice_ceil((a - anchor) / h);
    const long kb = detail::lattice_floor((b - anchor) / h);
    if (kb < ka) {
        return detail::simpson_cell(f, a, b, f(a), f(b));
    }

    auto node = [&](long k) { return anchor + static_cast<double>(k) * h; };
    const double xa = node(ka);
    const double xb = node(kb);
    const long m = kb - ka;

    V sum{};
    const V fxa = f(xa);
    const V fxb = m == 0 ? fxa : f(xb);

    if (xa - a > detail::snap_tolerance * h)
        sum += detail::simpson_cell(f, a, xa, f(a), fxa);

    if (m == 1) {
        sum += detail::simpson_cell(f, xa, xb, fxa, fxb);
    } else if (m >= 2) {
        const long simpson_end = (m % 2 == 0) ? m : m - 3;
        V s{};
        if (simpson_end > 0) {
            s = fxa;
            for (long j = 1; j < simpson_end; ++j)
                s += f(node(ka + j)) * (j % 2 == 1 ? 4.0 : 2.0);
            s += simpson_end == m ? fxb : f(node(ka + simpson_end));
            sum += s * (h / 3.0);
        }
        if (simpson_end != m) {
            const long j0 = ka + simpson_end;
            const V f0 = simpson_end == 0 ? fxa : f(node(j0));
            sum += (f0 + f(node(j0 + 1)) * 3.0 + f(node(j0 + 2)) * 3.0 + fxb) * (3.0 * h / 8.0);
        }
    }

    if (b - xb > detail::snap_tolerance * h)
        sum += detail::simpson_cell(f, xb, b, fxb, f(b));
    return sum;
}

} // namespace mtqm
