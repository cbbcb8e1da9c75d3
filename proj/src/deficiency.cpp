#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "mtqm/parallel.hpp"
#include "mtqm/verification.hpp"

namespace mtqm {

namespace {

cplx call(const Profile& p, double x, double y) { return p ? p(x, y) : cplx(0.0); }

// Composite 10-point Gauss-Legendre nodes and weights on [a, b], panels no wider than `panel`.
struct PanelRule {
    std::vector<double> x, w;

    PanelRule(double a, double b, double panel)
    {
        using GL = boost::math::quadrature::gauss<double, 10>;
        const long n = std::max(1L, static_cast<long>(std::ceil((b - a) / panel)));
        const double half = 0.5 * (b - a) / static_cast<double>(n);
        for (long i = 0; i < n; ++i) {
            const double mid = a + (2.0 * static_cast<double>(i) + 1.0) * half;
            for (std::size_t k = 0; k < GL::abscissa().size(); ++k)
                for (double sgn : {-1.0, 1.0}) {
                    if (sgn > 0 && GL::abscissa()[k] == 0.0)
                        continue;
                    x.push_back(mid + sgn * half * GL::abscissa()[k]);
                    w.push_back(half * GL::weights()[k]);
                }
        }
    }
};

template <class F>
double wedge_integral(const WedgeQuadrature& q, F&& density)
{
    const PanelRule sp(q.sp_lo, q.sp_hi, q.panel), rel(0.0, q.s_max, q.panel);
    std::vector<double> partial(sp.x.size(), 0.0);
    parallel_for(partial.size(), [&](std::size_t a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < rel.x.size(); ++b)
            for (std::size_t c = 0; c < rel.x.size(); ++c)
                acc += rel.w[b] * rel.w[c] * density(sp.x[a], rel.x[b], rel.x[c]);
        partial[a] = sp.w[a] * acc;
    });
    double total = 0.0;
    for (double p : partial)
        total += p;
    return total;
}

} // namespace

ThreeBodyValues DeficiencyElement::evaluate(double sp, double s, double st) const
{
    ThreeBodyValues v{};
    const double es = std::exp(-rate * s), et = std::exp(-rate * st);
    const auto& p = profiles;
    if (sign > 0) {
        v[2] = es * call(p[0], sp - s, st);
        v[3] = es * call(p[1], sp - s, st + s);
        v[4] = et * call(p[2], sp + st, s + st);
        v[6] = et * call(p[3], sp + st, s);
    } else {
        v[1] = et * call(p[0], sp + st, s);
        v[3] = et * call(p[1], sp + st, s + st);
        v[4] = es * call(p[2], sp - s, st + s);
        v[5] = es * call(p[3], sp - s, st);
    }
    return v;
}

ThreeBodyValues DeficiencyElement::at(double s_ph, double s_e1, double s_e2) const
{
    return evaluate(s_ph, 0.5 * (s_ph - s_e1), 0.5 * (s_e2 - s_ph));
}

double deficiency_residual(const DeficiencyElement& elem, double h)
{
    if (!(h > 0.0))
        throw DomainError("deficiency_residual: spacing must be positive");
    std::vector<std::array<double, 3>> points;
    for (int a = 0; a <= 8; ++a)
        for (int b = 0; b <= 6; ++b)
            for (int c = 0; c <= 6; ++c)
                points.push_back({-1.0 + 0.25 * a, 0.3 + 0.3 * b, 0.3 + 0.3 * c});
    if (h >= 0.3)
        throw DomainError("deficiency_residual: stencil reaches the walls");

    std::vector<double> worst(points.size(), 0.0);
    parallel_for(points.size(), [&](std::size_t n) {
        const auto [sp, s, st] = points[n];
        const double x = sp, y = sp - 2.0 * s, z = sp + 2.0 * st;
        const auto v = elem.at(x, y, z);
        std::array<ThreeBodyValues, 3> d;
        for (int axis = 0; axis < 3; ++axis) {
            double p[3] = {x, y, z}, m[3] = {x, y, z};
            p[axis] += h;
            m[axis] -= h;
            const auto vp = elem.at(p[0], p[1], p[2]), vm = elem.at(m[0], m[1], m[2]);
            for (int c = 0; c < 8; ++c)
                d[axis][c] = (vp[c] - vm[c]) / (2.0 * h);
        }
        double w = 0.0;
        for (int c = 0; c < 8; ++c) {
            const double s0 = (c & 4) ? 1 : -1, s1 = (c & 2) ? 1 : -1, s2 = (c & 1) ? 1 : -1;
            // H* psi = i (s0 d_ph + s1 d_e1 + s2 d_e2) psi, compared against +/- i psi.
            const cplx hpsi = s0 * d[0][c] + s1 * d[1][c] + s2 * d[2][c];
            w = std::max(w, std::abs(hpsi - static_cast<double>(elem.sign) * v[c]));
        }
        worst[n] = w;
    });
    return *std::max_element(worst.begin(), worst.end());
}

double deficiency_norm(const DeficiencyElement& elem, const WedgeQuadrature& q)
{
    return std::sqrt(wedge_integral(q, [&](double sp, double s, double st) {
        double acc = 0.0;
        for (cplx z : elem.evaluate(sp, s, st))
            acc += std::norm(z);
        return acc;
    }));
}

double deficiency_distance(const DeficiencyElement& a, const DeficiencyElement& b, const WedgeQuadrature& q)
{
    return std::sqrt(wedge_integral(q, [&](double sp, double s, double st) {
        const auto va = a.evaluate(sp, s, st), vb = b.evaluate(sp, s, st);
        double acc = 0.0;
        for (int c = 0; c < 8; ++c)
            acc += std::norm(va[c] - vb[c]);
        return acc;
    }));
}

DeficiencyElement contraction_image(const DeficiencyElement& f, double epsilon, double theta1, double theta2)
{
    if (f.sign != -1 || f.rate != 1.0)
        throw DomainError("contraction_T: input must be an element of Ker(i + H*)");
    if (epsilon < 0.0)
        throw DomainError("contraction_T: negative epsilon");
    std::function<double(double)> mu = [](double) { return 1.0; };
    if (epsilon > 0.0)
        mu = [m = TransitionFunction(epsilon)](double d) { return m(d); };
    const cplx p1 = std::polar(1.0, theta1), p2 = std::polar(1.0, theta2);
    const Profile f1 = f.profiles[0], f3 = f.profiles[1], f4 = f.profiles[2], f5 = f.profiles[3];

    // The g profiles follow from imposing both wall conditions on Psi_- + Psi_+ at s = 0 and s~ = 0.
    DeficiencyElement g;
    g.sign = 1;
    g.profiles[0] = [=](double x, double y) {
        const double m = mu(y);
        return p1 * m * ((1.0 - std::exp(-2.0 * y)) * call(f4, x, y) + p2 * std::exp(-y) * m * call(f1, x + y, y));
    };
    g.profiles[1] = [=](double x, double y) { return p1 * mu(y) * call(f5, x, y) - std::exp(-y) * call(f3, x + y, y); };
    g.profiles[2] = [=](double x, double y) { return p2 * mu(y) * call(f1, x, y) - std::exp(-y) * call(f4, x - y, y); };
    g.profiles[3] = [=](double x, double y) {
        const double m = mu(y);
        return p2 * m * ((1.0 - std::exp(-2.0 * y)) * call(f3, x, y) + p1 * std::exp(-y) * m * call(f5, x - y, y));
    };
    return g;
}

ContractionResult contraction_T(const DeficiencyElement& f, double epsilon, double theta1, double theta2,
                                const WedgeQuadrature& q)
{
    ContractionResult out;
    out.image = contraction_image(f, epsilon, theta1, theta2);
    out.input_norm = deficiency_norm(f, q);
    out.output_norm = deficiency_norm(out.image, q);
    return out;
}

} // namespace mtqm
