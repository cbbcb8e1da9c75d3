#include "mtqm/free.hpp"

#include <cmath>

#include "mtqm/parallel.hpp"

namespace mtqm {

namespace {

// Node lookup without interpolation when s falls on the field's lattice.
struct FieldReader {
    const SampledField1D& f;
    cplx operator()(double s) const
    {
        const Grid1D& g = f.grid();
        const double u = (s - g.origin()) / g.spacing();
        const double r = std::round(u);
        if (std::abs(u - r) < detail::snap_tolerance) {
            const long i = static_cast<long>(r);
            if (i < 0 || i >= static_cast<long>(g.count()))
                return f.compact() ? cplx(0.0) : interpolate(f, s);
            return f[static_cast<std::size_t>(i)];
        }
        return interpolate(f, s);
    }
};

void check_cone(double t, double s)
{
    if (!(std::abs(s) < t))
        throw DomainError("goursat: point outside the open forward cone |s| < t");
}

} // namespace

ElectronSpinor::ElectronSpinor(SampledField1D minus, SampledField1D plus)
    : psi_minus(std::move(minus)), psi_plus(std::move(plus))
{
    if (!(psi_minus.grid() == psi_plus.grid()))
        throw DomainError("ElectronSpinor: components must share one grid");
}

PhotonBispinor::PhotonBispinor(SampledField1D minus, SampledField1D plus)
    : chi_minus(std::move(minus)), chi_plus(std::move(plus))
{
    if (!(chi_minus.grid() == chi_plus.grid()))
        throw DomainError("PhotonBispinor: components must share one grid");
}

cplx kg_cauchy(const ScalarFn& A, const ScalarFn& B, double omega, double t, double s, double h, double anchor)
{
    if (t < 0.0)
        throw DomainError("kg_cauchy: negative time");
    if (t == 0.0)
        return A(s);
    const double c1 = -0.25 * omega * omega * t;
    auto integrand = [&](double sigma) {
        const double d = s - sigma;
        double j0, j1h;
        bessel_j01(omega * std::sqrt(std::max(0.0, t * t - d * d)), j0, j1h);
        const cplx a = omega == 0.0 ? cplx(0.0) : c1 * j1h * A(sigma);
        return a + 0.5 * j0 * B(sigma);
    };
    return 0.5 * (A(s - t) + A(s + t)) + integrate_lattice(integrand, s - t, s + t, anchor, h);
}

cplx kg_cauchy(const SampledField1D& A, const SampledField1D& B, double omega, double t, double s)
{
    if (!(A.grid() == B.grid()))
        throw DomainError("kg_cauchy: A and B must share one grid");
    const FieldReader ra{A}, rb{B};
    return kg_cauchy(ScalarFn(ra), ScalarFn(rb), omega, t, s, A.grid().spacing(), A.grid().origin());
}

std::array<cplx, 2> dirac_point(const ScalarFn& minus, const ScalarFn& plus, double omega, double t, double s,
                                double h, double anchor)
{
    return detail::dirac_point_impl(minus, plus, omega, t, s, h, anchor);
}

std::array<cplx, 2> dirac_point(const ElectronSpinor& initial, double omega, double t, double s)
{
    const FieldReader rm{initial.psi_minus}, rp{initial.psi_plus};
    return detail::dirac_point_impl(rm, rp, omega, t, s, initial.grid().spacing(), initial.grid().origin());
}

ElectronSpinor dirac_propagate(const ElectronSpinor& initial, double omega, double t)
{
    if (t < 0.0)
        throw DomainError("dirac_propagate: negative time");
    const Grid1D& g = initial.grid();
    const std::size_t pad = static_cast<std::size_t>(std::ceil(t / g.spacing() - detail::snap_tolerance));
    const Grid1D out(g.origin() - static_cast<double>(pad) * g.spacing(), g.spacing(), g.count() + 2 * pad);
    std::vector<cplx> vm(out.count()), vp(out.count());
    parallel_for(out.count(), [&](std::size_t i) {
        const auto v = dirac_point(initial, omega, t, out.point(i));
        vm[i] = v[0];
        vp[i] = v[1];
    });
    return ElectronSpinor(SampledField1D(out, std::move(vm), initial.psi_minus.compact()),
                          SampledField1D(out, std::move(vp), initial.psi_plus.compact()));
}

std::pair<cplx, cplx> photon_transport(const PhotonBispinor& initial, double t, double s)
{
    return {interpolate(initial.chi_minus, s - t), interpolate(initial.chi_plus, s + t)};
}

cplx goursat_right(const SampledField1D& F, double omega, double t, double s)
{
    check_cone(t, s);
    const FieldReader r{F};
    if (F.grid().origin() != 0.0)
        throw DomainError("goursat_right: data must be sampled from b = 0");
    return detail::goursat_right_impl(r, omega, t, s, F.grid().spacing());
}

cplx goursat_left(const SampledField1D& G, double omega, double t, double s)
{
    check_cone(t, s);
    const FieldReader r{G};
    if (G.grid().origin() != 0.0)
        throw DomainError("goursat_left: data must be sampled from c = 0");
    return detail::goursat_right_impl(r, omega, t, -s, G.grid().spacing());
}

cplx goursat_right(const ScalarFn& F, double omega, double t, double s, double h)
{
    check_cone(t, s);
    return detail::goursat_right_impl(F, omega, t, s, h);
}

cplx goursat_left(const ScalarFn& G, double omega, double t, double s, double h)
{
    check_cone(t, s);
    return detail::goursat_right_impl(G, omega, t, -s, h);
}

cplx sourced_transport(cplx foot_value, const ScalarFn& source, double omega, double t, double h)
{
    if (omega == 0.0 || t == 0.0)
        return foot_value;
    const double lo = std::min(0.0, t), hi = std::max(0.0, t);
    cplx integral = integrate_lattice(source, lo, hi, 0.0, h);
    if (t < 0.0)
        integral = -integral;
    return foot_value - cplx(0.0, omega) * integral;
}

cplx sourced_transport(const SampledField1D& boundary_line, double foot, const ScalarFn& source, double omega,
                       double t, double h)
{
    return sourced_transport(interpolate(boundary_line, foot), source, omega, t, h);
}

} // namespace mtqm
