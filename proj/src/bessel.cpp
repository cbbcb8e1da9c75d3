#include "mtqm/core.hpp"

#include <cmath>
#include <numbers>

namespace mtqm {

namespace {

// Below this argument the power series (summed in extended precision) is used; above it
// the Hankel expansion truncated at its smallest term is accurate to ~5e-13.
constexpr double series_limit = 12.0;

void series01(double x, double& j0, double& j1h)
{
    const long double q = -0.25L * static_cast<long double>(x) * x;
    long double t0 = 1.0L, t1 = 1.0L;
    long double s0 = 1.0L, s1 = 1.0L;
    for (int k = 1; k < 200; ++k) {
        t0 *= q / (static_cast<long double>(k) * k);
        t1 *= q / (static_cast<long double>(k) * (k + 1));
        s0 += t0;
        s1 += t1;
        if (std::fabs(t0) < 1e-21L && std::fabs(t1) < 1e-21L)
            break;
    }
    j0 = static_cast<double>(s0);
    j1h = static_cast<double>(s1);
}

double hankel(int nu, double x)
{
    const double mu = 4.0 * nu * nu;
    const double inv8x = 1.0 / (8.0 * x);
    double p = 1.0, q = 0.0;
    double term = 1.0;
    double last = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (mu - odd * odd) * inv8x / k;
        if (std::abs(next) > std::abs(last) || std::abs(next) < 1e-18)
            break;
        term = next;
        last = std::abs(next);
        // a_k/x^k enters P with sign (-1)^(k/2) for even k and Q with (-1)^((k-1)/2) for odd k.
        switch (k % 4) {
        case 0: p += term; break;
        case 1: q += term; break;
        case 2: p -= term; break;
        case 3: q -= term; break;
        }
    }
    const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace

void bessel_j01(double x, double& j0, double& j1h)
{
    if (!(x >= 0.0))
        throw DomainError("bessel: negative argument");
    if (x < series_limit) {
        series01(x, j0, j1h);
        return;
    }
    j0 = hankel(0, x);
    j1h = hankel(1, x) * 2.0 / x;
}

double bessel_j(int order, double x)
{
    if (order != 0 && order != 1)
        throw DomainError("bessel_j: order must be 0 or 1");
    if (!(x >= 0.0))
        throw DomainError("bessel_j: negative argument");
    if (x < series_limit) {
        double j0, j1h;
        series01(x, j0, j1h);
        return order == 0 ? j0 : 0.5 * x * j1h;
    }
    return hankel(order, x);
}

} // namespace mtqm
