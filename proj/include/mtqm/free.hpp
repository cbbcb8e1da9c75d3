#pragma once

#include <array>
#include <utility>

#include "mtqm/core.hpp"

namespace mtqm {

/// Dirac electron (psi_-, psi_+) on one grid. psi_- moves right, psi_+ moves left.
struct ElectronSpinor {
    SampledField1D psi_minus;
    SampledField1D psi_plus;

    ElectronSpinor() = default;
    ElectronSpinor(SampledField1D minus, SampledField1D plus);

    const Grid1D& grid() const { return psi_minus.grid(); }
    double norm_squared() const { return psi_minus.l2_norm_squared() + psi_plus.l2_norm_squared(); }
};

/// Photon components (chi_-, chi_+) on one grid.
struct PhotonBispinor {
    SampledField1D chi_minus;
    SampledField1D chi_plus;

    PhotonBispinor() = default;
    PhotonBispinor(SampledField1D minus, SampledField1D plus);
};

/// Klein-Gordon Cauchy solution w(t, s) with w(0) = A, w_t(0) = B.
cplx kg_cauchy(const SampledField1D& A, const SampledField1D& B, double omega, double t, double s);
cplx kg_cauchy(const ScalarFn& A, const ScalarFn& B, double omega, double t, double s, double h,
               double anchor = 0.0);

/// One output point of the free Dirac evolution. Quadrature nodes lie on anchor + k*h.
std::array<cplx, 2> dirac_point(const ScalarFn& minus, const ScalarFn& plus, double omega, double t, double s,
                                double h, double anchor = 0.0);
std::array<cplx, 2> dirac_point(const ElectronSpinor& initial, double omega, double t, double s);

/// Free Dirac evolution on a grid widened by t on both sides.
ElectronSpinor dirac_propagate(const ElectronSpinor& initial, double omega, double t);

/// (chi_-(s - t), chi_+(s + t)).
std::pair<cplx, cplx> photon_transport(const PhotonBispinor& initial, double t, double s);

/// Goursat operators on the forward cone |s| < t with data F(b) = U(b, b), G(c) = U(c, -c).
cplx goursat_right(const SampledField1D& F, double omega, double t, double s);
cplx goursat_left(const SampledField1D& G, double omega, double t, double s);
cplx goursat_right(const ScalarFn& F, double omega, double t, double s, double h);
cplx goursat_left(const ScalarFn& G, double omega, double t, double s, double h);

/// foot_value - i*omega * integral_0^t source.
cplx sourced_transport(cplx foot_value, const ScalarFn& source, double omega, double t, double h);
cplx sourced_transport(const SampledField1D& boundary_line, double foot, const ScalarFn& source, double omega,
                       double t, double h);

namespace detail {

// Closed-cone versions used by the solvers, templated to avoid std::function in hot loops.
template <class F>
cplx goursat_right_impl(F&& f, double omega, double t, double s, double h);

template <class Fm, class Fp>
std::array<cplx, 2> dirac_point_impl(Fm&& minus, Fp&& plus, double omega, double t, double s, double h,
                                     double anchor);

} // namespace detail

} // namespace mtqm

#include "mtqm/detail/free_impl.hpp"
