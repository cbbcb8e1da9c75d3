#pragma once

#include <algorithm>
#include <cmath>

namespace mtqm::detail {

template <class F>
cplx goursat_right_impl(F&& f, double omega, double t, double s, double h)
{
    const double top = 0.5 * (t + s);
    const cplx head = f(top);
    if (omega == 0.0)
        return head;
    const cplx f0 = f(0.0);
    const double tm = t - s;
    double j0, j1h;
    bessel_j01(omega * std::sqrt(std::max(0.0, tm * (t + s))), j0, j1h);
    auto integrand = [&](double b) {
        double k0, k1h;
        bessel_j01(omega * std::sqrt(std::max(0.0, tm * (t + s - 2.0 * b))), k0, k1h);
        return f(b) * k1h;
    };
    const cplx integral = integrate_lattice(integrand, 0.0, std::max(0.0, top), 0.0, h);
    return head - 0.5 * f0 * j0 - 0.5 * omega * omega * tm * integral;
}

template <class Fm, class Fp>
std::array<cplx, 2> dirac_point_impl(Fm&& minus, Fp&& plus, double omega, double t, double s, double h,
                                     double anchor)
{
    if (t < 0.0)
        throw DomainError("dirac: negative time");
    std::array<cplx, 2> out{minus(s - t), plus(s + t)};
    if (omega == 0.0 || t == 0.0)
        return out;
    const double c1 = -0.25 * omega * omega;
    const cplx c0(0.0, -0.5 * omega);
    auto integrand = [&](double sigma) {
        const double d = s - sigma;
        double j0, j1h;
        bessel_j01(omega * std::sqrt(std::max(0.0, t * t - d * d)), j0, j1h);
        const cplx vm = minus(sigma);
        const cplx vp = plus(sigma);
        return CPair{c1 * (t + d) * j1h * vm + c0 * j0 * vp, c1 * (t - d) * j1h * vp + c0 * j0 * vm};
    };
    const CPair r = integrate_lattice(integrand, s - t, s + t, anchor, h);
    out[0] += r.a;
    out[1] += r.b;
    return out;
}

} // namespace mtqm::detail
