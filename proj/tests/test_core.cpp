#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/bessel.hpp>

#include "mtqm/core.hpp"

using namespace mtqm;

namespace {

long double series_j0(long double x)
{
    long double term = 1.0L, sum = 1.0L;
    const long double q = -x * x / 4.0L;
    for (int k = 1; k < 300; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
        if (std::fabs(term) < 1e-30L)
            break;
    }
    return sum;
}

} // namespace

TEST_CASE("bessel_j special values")
{
    CHECK(bessel_j(0, 0.0) == 1.0);
    CHECK(bessel_j(1, 0.0) == 0.0);
    CHECK(std::abs(bessel_j(0, 2.4048255577)) < 1e-9);
    CHECK_THROWS_AS(bessel_j(0, -1.0), DomainError);
    CHECK_THROWS_AS(bessel_j(2, 1.0), DomainError);
}

TEST_CASE("first zero of J0 from the series oracle")
{
    long double a = 2.0L, b = 3.0L;
    for (int i = 0; i < 200; ++i) {
        const long double m = 0.5L * (a + b);
        (series_j0(a) * series_j0(m) <= 0 ? b : a) = m;
    }
    const double root = static_cast<double>(0.5L * (a + b));
    CHECK(root == doctest::Approx(2.404825557695773).epsilon(1e-14));
    CHECK(std::abs(bessel_j(0, root)) < 1e-12);
}

TEST_CASE("bessel_j agrees with an independent implementation")
{
    double worst = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double x = 50.0 * i / 10000.0;
        for (int n = 0; n <= 1; ++n)
            worst = std::max(worst, std::abs(bessel_j(n, x) - boost::math::cyl_bessel_j(n, x)));
    }
    CHECK(worst < 1e-10);
    worst = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double x = 1000.0 * i / 20000.0;
        for (int n = 0; n <= 1; ++n)
            worst = std::max(worst, std::abs(bessel_j(n, x) - boost::math::cyl_bessel_j(n, x)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("bessel_j01 returns J1(x)/(x/2)")
{
    for (double x : {1e-6, 1e-3, 0.5, 3.0, 11.9, 12.1, 40.0}) {
        double j0, j1h;
        bessel_j01(x, j0, j1h);
        CHECK(j0 == doctest::Approx(bessel_j(0, x)).epsilon(1e-12));
        CHECK(0.5 * x * j1h == doctest::Approx(bessel_j(1, x)).epsilon(1e-11));
    }
    double j0, j1h;
    bessel_j01(0.0, j0, j1h);
    CHECK(j1h == 1.0);
}

TEST_CASE("Grid1D invariants")
{
    Grid1D g(-1.0, 0.25, 9);
    CHECK(g.point(0) == -1.0);
    CHECK(g.point(8) == 1.0);
    CHECK(g.contains(0.3));
    CHECK_FALSE(g.contains(1.1));
    CHECK_THROWS_AS(Grid1D(0.0, -1.0, 4), DomainError);
    CHECK_THROWS_AS(Grid1D(0.0, 1.0, 1), DomainError);
    const Grid1D c = Grid1D::covering(-0.3, 0.7, 0.25);
    CHECK(c.lo() == -0.5);
    CHECK(c.hi() == 0.75);
}

TEST_CASE("integrate examples")
{
    const Grid1D g(0.0, 0.01, 101);
    const auto one = SampledField1D::sample(g, [](double) { return cplx(1.0); });
    CHECK(std::abs(integrate(one, 0.0, 1.0) - 1.0) < 1e-12);

    const Grid1D g2(0.0, 0.1, 21);
    const auto lin = SampledField1D::sample(g2, [](double s) { return cplx(s); });
    CHECK(std::abs(integrate(lin, 0.0, 2.0) - 2.0) < 1e-12);

    const Grid1D g3(0.0, 0.01, 316);
    const auto sine = SampledField1D::sample(g3, [](double s) { return cplx(std::sin(s)); });
    CHECK(std::abs(integrate(sine, 0.0, std::numbers::pi) - 2.0) < 1e-8);

    CHECK_THROWS_AS(integrate(one, 0.5, 0.2), DomainError);
    CHECK_THROWS_AS(integrate(one, -0.5, 0.2), DomainError);
}

TEST_CASE("integrate is exact for quadratics, including fractional end cells")
{
    auto q = [](double s) { return cplx(3.0 * s * s - s + 2.0, s * s); };
    auto exact = [](double a, double b) {
        auto F = [](double s) { return cplx(s * s * s - 0.5 * s * s + 2.0 * s, s * s * s / 3.0); };
        return F(b) - F(a);
    };
    for (auto [a, b] : {std::pair{0.0, 1.0}, {0.0, 0.3}, {0.013, 0.977}, {0.2, 0.25}, {0.0, 0.07}}) {
        CHECK(std::abs(integrate(q, a, b, 0.0, 0.1) - exact(a, b)) < 1e-12);
    }
}

TEST_CASE("integrate is linear")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Grid1D g(-1.0, 0.02, 101);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<cplx> f(g.count()), h(g.count()), mix(g.count());
        const cplx alpha(u(rng), u(rng)), beta(u(rng), u(rng));
        for (std::size_t i = 0; i < g.count(); ++i) {
            f[i] = {u(rng), u(rng)};
            h[i] = {u(rng), u(rng)};
            mix[i] = alpha * f[i] + beta * h[i];
        }
        const double a = -0.987, b = 0.731;
        const cplx lhs = integrate(SampledField1D(g, mix), a, b);
        const cplx rhs = alpha * integrate(SampledField1D(g, f), a, b) + beta * integrate(SampledField1D(g, h), a, b);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("interpolate examples")
{
    const Grid1D g(-1.0, 0.01, 201);
    const auto gauss = SampledField1D::sample(g, [](double s) { return cplx(std::exp(-s * s)); });
    CHECK(interpolate(gauss, g.point(37)) == gauss[37]);
    // Midpoint of a central cell: the cubic remainder is (3/128) h^4 f(xi), with f(0) = 12.
    const double err = std::abs(interpolate(gauss, 0.005) - std::exp(-0.005 * 0.005));
    CHECK(err <= 3.0 / 128.0 * 1e-8 * 12.0 * 1.001);

    const auto lin = SampledField1D::sample(g, [](double s) { return cplx(2.0 * s + 1.0, -s); });
    CHECK(std::abs(interpolate(lin, 0.125) - cplx(1.25, -0.125)) < 1e-14);
    CHECK(std::abs(interpolate(lin, -0.995) - cplx(-0.99, 0.995)) < 1e-14);

    CHECK(interpolate(gauss, 3.0) == cplx(0.0));
    const SampledField1D open(g, gauss.values(), false);
    CHECK_THROWS_AS(interpolate(open, 3.0), DomainError);
}

TEST_CASE("interpolate reproduces cubics on interior cells")
{
    const Grid1D g(0.0, 0.1, 21);
    auto p = [](double s) { return cplx(s * s * s - 2.0 * s * s + 0.5, 4.0 * s * s * s); };
    const auto f = SampledField1D::sample(g, p);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 1.9);
    for (int i = 0; i < 200; ++i) {
        const double s = u(rng);
        CHECK(std::abs(interpolate(f, s) - p(s)) < 1e-12);
    }
}

TEST_CASE("2D and 3D interpolation reproduce tensor cubics")
{
    const Grid1D g(0.0, 0.2, 11);
    std::vector<cplx> v2, v3;
    auto p = [](double x, double y, double z) { return cplx(x * x * x - y * y * z + 2.0 * z, x * y); };
    for (std::size_t i = 0; i < 11; ++i)
        for (std::size_t j = 0; j < 11; ++j) {
            v2.push_back(p(g.point(i), g.point(j), 0.3));
            for (std::size_t k = 0; k < 11; ++k)
                v3.push_back(p(g.point(i), g.point(j), g.point(k)));
        }
    const SampledField2D f2(g, g, v2);
    const SampledField3D f3(g, g, g, v3);
    CHECK(std::abs(interpolate(f2, 0.73, 1.11) - p(0.73, 1.11, 0.3)) < 1e-12);
    CHECK(std::abs(interpolate(f3, 0.73, 1.11, 0.57) - p(0.73, 1.11, 0.57)) < 1e-12);
}

TEST_CASE("PhysicalParams reduces phases")
{
    const auto p = PhysicalParams::make(1.0, 2.0 * std::numbers::pi + 0.5, -0.5);
    CHECK(p.theta1 == doctest::Approx(0.5));
    CHECK(p.theta2 == doctest::Approx(2.0 * std::numbers::pi - 0.5));
    CHECK(p.omega() == 1.0);
    CHECK_THROWS_AS(PhysicalParams::make(-1.0, 0.0), DomainError);
}
