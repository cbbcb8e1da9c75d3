#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtqm {

using cplx = std::complex<double>;
using ScalarFn = std::function<cplx(double)>;

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Raised when a solver is asked to step outside the regime its formulas cover.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class Grid1D {
public:
    Grid1D() = default;
    Grid1D(double origin, double spacing, std::size_t count);

    double origin() const { return origin_; }
    double spacing() const { return spacing_; }
    std::size_t count() const { return count_; }
    double point(std::size_t i) const { return origin_ + static_cast<double>(i) * spacing_; }
    double lo() const { return origin_; }
    double hi() const { return point(count_ - 1); }
    bool contains(double s) const;

    // Grid with the same spacing covering [lo, hi], aligned to `anchor`.
    static Grid1D covering(double lo, double hi, double spacing, double anchor = 0.0);

    bool operator==(const Grid1D& o) const
    {
        return origin_ == o.origin_ && spacing_ == o.spacing_ && count_ == o.count_;
    }

private:
    double origin_ = 0.0;
    double spacing_ = 1.0;
    std::size_t count_ = 2;
};

class SampledField1D {
public:
    SampledField1D() = default;
    SampledField1D(Grid1D grid, std::vector<cplx> values, bool compact = true);

    static SampledField1D sample(const Grid1D& grid, const ScalarFn& f, bool compact = true);

    const Grid1D& grid() const { return grid_; }
    const std::vector<cplx>& values() const { return values_; }
    cplx operator[](std::size_t i) const { return values_[i]; }
    bool compact() const { return compact_; }
    double l2_norm_squared() const;

private:
    Grid1D grid_;
    std::vector<cplx> values_;
    bool compact_ = true;
};

class SampledField2D {
public:
    SampledField2D() = default;
    SampledField2D(Grid1D gx, Grid1D gy, std::vector<cplx> values, bool compact = true);

    const Grid1D& grid_x() const { return gx_; }
    const Grid1D& grid_y() const { return gy_; }
    cplx at(std::size_t i, std::size_t j) const { return values_[i * gy_.count() + j]; }
    const std::vector<cplx>& values() const { return values_; }
    bool compact() const { return compact_; }

private:
    Grid1D gx_, gy_;
    std::vector<cplx> values_;
    bool compact_ = true;
};

class SampledField3D {
public:
    SampledField3D() = default;
    SampledField3D(Grid1D gx, Grid1D gy, Grid1D gz, std::vector<cplx> values, bool compact = true);

    const Grid1D& grid_x() const { return gx_; }
    const Grid1D& grid_y() const { return gy_; }
    const Grid1D& grid_z() const { return gz_; }
    cplx at(std::size_t i, std::size_t j, std::size_t k) const
    {
        return values_[(i * gy_.count() + j) * gz_.count() + k];
    }
    const std::vector<cplx>& values() const { return values_; }
    bool compact() const { return compact_; }

private:
    Grid1D gx_, gy_, gz_;
    std::vector<cplx> values_;
    bool compact_ = true;
};

struct PhysicalParams {
    double electron_mass = 1.0;
    double theta1 = 0.0;
    double theta2 = 0.0;

    double omega() const { return electron_mass; }

    // Validates the mass and reduces both phases into [0, 2pi).
    static PhysicalParams make(double electron_mass, double theta1, double theta2 = 0.0);
};

double reduce_phase(double theta);

/// J0(x) or J1(x) for x >= 0, absolute accuracy better than 1e-10 on [0, 1e3].
double bessel_j(int order, double x);

/// J0(x) and J1(x)/(x/2) from one evaluation. The second is regular at 0 with value 1.
void bessel_j01(double x, double& j0, double& j1_over_half_x);

/// Cubic Lagrange interpolation, linear in the two boundary cells.
cplx interpolate(const SampledField1D& field, double s);
cplx interpolate(const SampledField2D& field, double x, double y);
cplx interpolate(const SampledField3D& field, double x, double y, double z);

/// Composite Simpson over the grid nodes inside [a, b]; the last three intervals use
/// the 3/8 rule when the count is odd, and fractional end cells use Simpson with an
/// interpolated midpoint.
cplx integrate(const SampledField1D& field, double a, double b);

/// Same rule for a callable sampled on the lattice anchor + k*h.
cplx integrate(const ScalarFn& f, double a, double b, double anchor, double h);

/// Generic form of the same rule; the value type only needs +, += and scaling by double.
template <class F>
auto integrate_lattice(F&& f, double a, double b, double anchor, double h);

/// Two complex numbers integrated together (shares kernel evaluations between them).
struct CPair {
    cplx a, b;
    CPair& operator+=(const CPair& o) { a += o.a; b += o.b; return *this; }
    friend CPair operator+(CPair x, const CPair& y) { return x += y; }
    friend CPair operator*(CPair x, double k) { return {x.a * k, x.b * k}; }
};

} // namespace mtqm

#include "mtqm/detail/quadrature.hpp"
