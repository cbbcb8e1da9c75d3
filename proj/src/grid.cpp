#include "mtqm/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace mtqm {

Grid1D::Grid1D(double origin, double spacing, std::size_t count)
    : origin_(origin), spacing_(spacing), count_(count)
{
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw DomainError("Grid1D: spacing must be positive");
    if (count < 2)
        throw DomainError("Grid1D: count must be at least 2");
    if (!std::isfinite(origin))
        throw DomainError("Grid1D: origin must be finite");
}

bool Grid1D::contains(double s) const
{
    const double tol = detail::snap_tolerance * spacing_;
    return s >= lo() - tol && s <= hi() + tol;
}

Grid1D Grid1D::covering(double lo, double hi, double spacing, double anchor)
{
    if (!(hi > lo))
        throw DomainError("Grid1D::covering: empty range");
    const long k0 = static_cast<long>(std::floor((lo - anchor) / spacing + detail::snap_tolerance));
    const long k1 = static_cast<long>(std::ceil((hi - anchor) / spacing - detail::snap_tolerance));
    return Grid1D(anchor + static_cast<double>(k0) * spacing, spacing,
                  static_cast<std::size_t>(std::max(k1 - k0 + 1, 2L)));
}

SampledField1D::SampledField1D(Grid1D grid, std::vector<cplx> values, bool compact)
    : grid_(grid), values_(std::move(values)), compact_(compact)
{
    if (values_.size() != grid_.count())
        throw DomainError("SampledField1D: value count does not match grid");
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw DomainError("SampledField1D: non-finite value");
}

SampledField1D SampledField1D::sample(const Grid1D& grid, const ScalarFn& f, bool compact)
{
    std::vector<cplx> v(grid.count());
    for (std::size_t i = 0; i < grid.count(); ++i)
        v[i] = f(grid.point(i));
    return SampledField1D(grid, std::move(v), compact);
}

double SampledField1D::l2_norm_squared() const
{
    std::vector<cplx> a(values_.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] = std::norm(values_[i]);
    return integrate(SampledField1D(grid_, std::move(a), compact_), grid_.lo(), grid_.hi()).real();
}

SampledField2D::SampledField2D(Grid1D gx, Grid1D gy, std::vector<cplx> values, bool compact)
    : gx_(gx), gy_(gy), values_(std::move(values)), compact_(compact)
{
    if (values_.size() != gx_.count() * gy_.count())
        throw DomainError("SampledField2D: value count does not match grid");
}

SampledField3D::SampledField3D(Grid1D gx, Grid1D gy, Grid1D gz, std::vector<cplx> values, bool compact)
    : gx_(gx), gy_(gy), gz_(gz), values_(std::move(values)), compact_(compact)
{
    if (values_.size() != gx_.count() * gy_.count() * gz_.count())
        throw DomainError("SampledField3D: value count does not match grid");
}

double reduce_phase(double theta)
{
    if (!std::isfinite(theta))
        throw DomainError("phase must be finite");
    double r = std::fmod(theta, 2.0 * std::numbers::pi);
    if (r < 0.0)
        r += 2.0 * std::numbers::pi;
    if (r >= 2.0 * std::numbers::pi)
        r = 0.0;
    return r;
}

PhysicalParams PhysicalParams::make(double electron_mass, double theta1, double theta2)
{
    if (!(electron_mass >= 0.0) || !std::isfinite(electron_mass))
        throw DomainError("electron_mass must be finite and non-negative");
    return PhysicalParams{electron_mass, reduce_phase(theta1), reduce_phase(theta2)};
}

namespace {

// Stencil for a position u measured in cells from the first node of an n-node axis.
// Returns the first node index and the weights; width is 4 (cubic) or 2 (linear).
struct Stencil {
    long first = 0;
    int width = 0;
    std::array<double, 4> w{};
};

bool make_stencil(double u, long n, Stencil& st)
{
    const double tol = detail::snap_tolerance;
    if (u < -tol || u > static_cast<double>(n - 1) + tol)
        return false;
    const double r = std::round(u);
    if (std::abs(u - r) < tol) {
        st.first = static_cast<long>(r);
        st.width = 1;
        st.w[0] = 1.0;
        return true;
    }
    long i = static_cast<long>(std::floor(u));
    if (i >= n - 1)
        i = n - 2;
    const double x = u - static_cast<double>(i);
    if (i == 0 || i == n - 2) {
        st.first = i;
        st.width = 2;
        st.w[0] = 1.0 - x;
        st.w[1] = x;
        return true;
    }
    st.first = i - 1;
    st.width = 4;
    // Lagrange weights on nodes -1, 0, 1, 2 relative to i.
    st.w[0] = -x * (x - 1.0) * (x - 2.0) / 6.0;
    st.w[1] = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
    st.w[2] = -(x + 1.0) * x * (x - 2.0) / 2.0;
    st.w[3] = (x + 1.0) * x * (x - 1.0) / 6.0;
    return true;
}

bool axis_stencil(const Grid1D& g, double s, Stencil& st)
{
    return make_stencil((s - g.origin()) / g.spacing(), static_cast<long>(g.count()), st);
}

} // namespace

cplx interpolate(const SampledField1D& field, double s)
{
    Stencil st;
    if (!axis_stencil(field.grid(), s, st)) {
        if (field.compact())
            return cplx(0.0);
        throw DomainError("interpolate: position outside grid span");
    }
    cplx acc(0.0);
    for (int k = 0; k < st.width; ++k)
        acc += st.w[k] * field[static_cast<std::size_t>(st.first + k)];
    return acc;
}

cplx interpolate(const SampledField2D& field, double x, double y)
{
    Stencil sx, sy;
    if (!axis_stencil(field.grid_x(), x, sx) || !axis_stencil(field.grid_y(), y, sy)) {
        if (field.compact())
            return cplx(0.0);
        throw DomainError("interpolate: position outside grid span");
    }
    cplx acc(0.0);
    for (int a = 0; a < sx.width; ++a) {
        cplx row(0.0);
        for (int b = 0; b < sy.width; ++b)
            row += sy.w[b] * field.at(static_cast<std::size_t>(sx.first + a), static_cast<std::size_t>(sy.first + b));
        acc += sx.w[a] * row;
    }
    return acc;
}

cplx interpolate(const SampledField3D& field, double x, double y, double z)
{
    Stencil sx, sy, sz;
    if (!axis_stencil(field.grid_x(), x, sx) || !axis_stencil(field.grid_y(), y, sy) ||
        !axis_stencil(field.grid_z(), z, sz)) {
        if (field.compact())
            return cplx(0.0);
        throw DomainError("interpolate: position outside grid span");
    }
    cplx acc(0.0);
    for (int a = 0; a < sx.width; ++a) {
        cplx plane(0.0);
        for (int b = 0; b < sy.width; ++b) {
            cplx row(0.0);
            for (int c = 0; c < sz.width; ++c)
                row += sz.w[c] * field.at(static_cast<std::size_t>(sx.first + a), static_cast<std::size_t>(sy.first + b),
                                          static_cast<std::size_t>(sz.first + c));
            plane += sy.w[b] * row;
        }
        acc += sx.w[a] * plane;
    }
    return acc;
}

cplx integrate(const SampledField1D& field, double a, double b)
{
    const Grid1D& g = field.grid();
    if (!(a <= b))
        throw DomainError("integrate: reversed bounds");
    if (!g.contains(a) || !g.contains(b))
        throw DomainError("integrate: bounds outside grid span");
    const double h = g.spacing();
    auto f = [&](double s) {
        const double u = (s - g.origin()) / h;
        const double r = std::round(u);
        if (std::abs(u - r) < detail::snap_tolerance) {
            const long i = std::clamp(static_cast<long>(r), 0L, static_cast<long>(g.count()) - 1);
            return field[static_cast<std::size_t>(i)];
        }
        return interpolate(field, s);
    };
    return integrate_lattice(f, a, b, g.origin(), h);
}

cplx integrate(const ScalarFn& f, double a, double b, double anchor, double h)
{
    return integrate_lattice(f, a, b, anchor, h);
}

} // namespace mtqm
