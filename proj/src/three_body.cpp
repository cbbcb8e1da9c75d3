#include "mtqm/three_body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace mtqm {

const char* region_name(RegionLabel r)
{
    switch (r) {
    case RegionLabel::Free: return "free";
    case RegionLabel::Compton1: return "compton1";
    case RegionLabel::Compton2: return "compton2";
    case RegionLabel::Compton3: return "compton3";
    case RegionLabel::Coulomb: return "coulomb";
    }
    return "?";
}

void require_three_body_s1(const ThreeBodyConfig& c)
{
    if (!(c.e1.s < c.ph.s && c.ph.s < c.e2.s))
        throw DomainError("three-body configuration: need s_e1 < s_ph < s_e2");
    if (!(std::abs(c.ph.t - c.e1.t) < c.ph.s - c.e1.s) || !(std::abs(c.ph.t - c.e2.t) < c.e2.s - c.ph.s))
        throw DomainError("three-body configuration: photon must be spacelike to both electrons");
}

RegionLabel classify_three_body(const ThreeBodyConfig& c)
{
    require_three_body_s1(c);
    const bool left_far = c.e1.s + c.e1.t <= c.ph.s - c.ph.t;
    const bool right_far = c.ph.s + c.ph.t <= c.e2.s - c.e2.t;
    if (left_far && right_far)
        return RegionLabel::Free;
    if (c.e2.s - c.e2.t < c.e1.s + c.e1.t)
        return RegionLabel::Coulomb;
    if (right_far)
        return RegionLabel::Compton1;
    if (left_far)
        return RegionLabel::Compton2;
    return RegionLabel::Compton3;
}

ThreeBodyInitialData::ThreeBodyInitialData(Fn f, double support_gap) : f_(std::move(f)), gap_(support_gap)
{
    if (!(support_gap > 0.0))
        throw DomainError("three-body data: support gap must be positive");
}

ThreeBodyInitialData ThreeBodyInitialData::gaussians(std::vector<Term> terms, double support_gap,
                                                     double tail_tolerance)
{
    double peak = 0.0, tail = 0.0;
    auto bound = [&](double a, const Gaussian& l, const Gaussian& r) {
        const double sep = r.center - l.center - support_gap;
        const double var = l.width * l.width + r.width * r.width;
        return sep <= 0.0 ? a : a * std::exp(-0.5 * sep * sep / var);
    };
    for (const auto& t : terms) {
        if (t.comp < 0 || t.comp > 7)
            throw DomainError("three-body data: component index out of range");
        if (!(t.photon.width > 0.0) || !(t.e1.width > 0.0) || !(t.e2.width > 0.0))
            throw DomainError("three-body data: widths must be positive");
        const double a = std::abs(t.amplitude);
        peak = std::max(peak, a);
        tail += bound(a, t.e1, t.photon) + bound(a, t.photon, t.e2);
    }
    if (peak > 0.0 && tail > tail_tolerance * peak)
        throw DomainError("three-body data: support reaches within the support gap of a wall");
    auto f = [terms](int comp, double x, double y, double z) {
        cplx v(0.0);
        for (const auto& t : terms)
            if (t.comp == comp)
                v += t.amplitude * t.photon(x) * t.e1(y) * t.e2(z);
        return v;
    };
    ThreeBodyInitialData d(f, support_gap);
    d.terms_ = std::move(terms);
    return d;
}

namespace {

constexpr double no_tail_check = std::numeric_limits<double>::infinity();

Gaussian mirrored(const Gaussian& g) { return {-g.center, g.width, -g.momentum}; }

std::array<cplx, 2> electron(const Gaussian& g, int bit, const SpacetimePoint& x, double omega, double h)
{
    auto on = [&g](double s) { return g(s); };
    auto off = [](double) { return cplx(0.0); };
    if (bit == 0)
        return detail::dirac_point_impl(on, off, omega, x.t, x.s, h, 0.0);
    return detail::dirac_point_impl(off, on, omega, x.t, x.s, h, 0.0);
}

// Memoized values on quadrature nodes of the outer electron integral.
template <std::size_t N, class F>
class NodeCache {
public:
    explicit NodeCache(F f) : f_(std::move(f)) {}

    const std::array<cplx, N>& operator()(double s)
    {
        auto it = cache_.find(s);
        if (it == cache_.end())
            it = cache_.emplace(s, f_(s)).first;
        return it->second;
    }

private:
    F f_;
    std::unordered_map<double, std::array<cplx, N>> cache_;
};

template <std::size_t N, class F>
NodeCache<N, F> make_cache(F f)
{
    return NodeCache<N, F>(std::move(f));
}

ThreeBodyValues free_terms(const ThreeBodyInitialData& data, double omega, const ThreeBodyConfig& c, double h)
{
    ThreeBodyValues out{};
    for (const auto& t : data.terms()) {
        const int b0 = t.comp >> 2, b1 = (t.comp >> 1) & 1, b2 = t.comp & 1;
        const cplx ph = t.amplitude * t.photon(c.ph.s + bit_sign(b0) * c.ph.t);
        if (ph == cplx(0.0))
            continue;
        const auto E1 = electron(t.e1, b1, c.e1, omega, h);
        const auto E2 = electron(t.e2, b2, c.e2, omega, h);
        for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q)
                out[4 * b0 + 2 * p + q] += ph * E1[p] * E2[q];
    }
    return out;
}

ThreeBodyValues free_generic(const ThreeBodyInitialData& data, double omega, const ThreeBodyConfig& c, double h)
{
    ThreeBodyValues out{};
    for (int b0 = 0; b0 < 2; ++b0) {
        const double p = c.ph.s + bit_sign(b0) * c.ph.t;
        // inner[2*b2 + b1'] after evolving electron 1 at fixed s_e2.
        auto inner = make_cache<4>([&](double z) {
            std::array<cplx, 4> r{};
            for (int b2 = 0; b2 < 2; ++b2) {
                auto m = [&](double y) { return data(4 * b0 + b2, p, y, z); };
                auto q = [&](double y) { return data(4 * b0 + 2 + b2, p, y, z); };
                const auto e = detail::dirac_point_impl(m, q, omega, c.e1.t, c.e1.s, h, 0.0);
                r[2 * b2] = e[0];
                r[2 * b2 + 1] = e[1];
            }
            return r;
        });
        for (int b1 = 0; b1 < 2; ++b1) {
            auto m = [&](double z) { return inner(z)[b1]; };
            auto q = [&](double z) { return inner(z)[2 + b1]; };
            const auto e = detail::dirac_point_impl(m, q, omega, c.e2.t, c.e2.s, h, 0.0);
            out[4 * b0 + 2 * b1] = e[0];
            out[4 * b0 + 2 * b1 + 1] = e[1];
        }
    }
    return out;
}

// Photon and electron 1 through the contact solver in mirrored coordinates, where the
// photon sits left of the electron; electron 2 evolves freely.
ThreeBodyValues left_pair(const ThreeBodyInitialData& data, const PhysicalParams& params, const ThreeBodyConfig& c,
                          double h)
{
    const double omega = params.omega();
    const TwoBodyConfig mc{{c.ph.t, -c.ph.s}, {c.e1.t, -c.e1.s}};
    ThreeBodyValues out{};
    if (!data.terms().empty()) {
        for (const auto& t : data.terms()) {
            const int q = t.comp >> 1, b2 = t.comp & 1;
            const auto two = TwoBodyInitialData::gaussians(
                {{3 - q, t.amplitude, mirrored(t.photon), mirrored(t.e1)}}, data.support_gap(), no_tail_check);
            const auto phi = ContactSolver(two, omega, params.theta1, h).evaluate(mc);
            const auto E2 = electron(t.e2, b2, c.e2, omega, h);
            for (int p = 0; p < 4; ++p)
                for (int r = 0; r < 2; ++r)
                    out[2 * p + r] += phi[3 - p] * E2[r];
        }
        return out;
    }
    // slice[4*b2 + q] with q the unmirrored pair index.
    auto slice = make_cache<8>([&](double z) {
        std::array<cplx, 8> r{};
        for (int b2 = 0; b2 < 2; ++b2) {
            const TwoBodyInitialData two(
                [&data, z, b2](int m, double x, double y) { return data(2 * (3 - m) + b2, -x, -y, z); },
                data.support_gap());
            const auto phi = ContactSolver(two, omega, params.theta1, h).evaluate(mc);
            for (int q = 0; q < 4; ++q)
                r[4 * b2 + q] = phi[3 - q];
        }
        return r;
    });
    for (int q = 0; q < 4; ++q) {
        auto m = [&](double z) { return slice(z)[q]; };
        auto p = [&](double z) { return slice(z)[4 + q]; };
        const auto e = detail::dirac_point_impl(m, p, omega, c.e2.t, c.e2.s, h, 0.0);
        out[2 * q] = e[0];
        out[2 * q + 1] = e[1];
    }
    return out;
}

// Photon and electron 2 through the contact solver; electron 1 evolves freely.
ThreeBodyValues right_pair(const ThreeBodyInitialData& data, const PhysicalParams& params, const ThreeBodyConfig& c,
                           double h)
{
    const double omega = params.omega();
    const TwoBodyConfig pc{c.ph, c.e2};
    auto index = [](int pair, int b1) { return 4 * (pair >> 1) + 2 * b1 + (pair & 1); };
    ThreeBodyValues out{};
    if (!data.terms().empty()) {
        for (const auto& t : data.terms()) {
            const int b0 = t.comp >> 2, b1 = (t.comp >> 1) & 1, b2 = t.comp & 1;
            const auto two = TwoBodyInitialData::gaussians({{2 * b0 + b2, t.amplitude, t.photon, t.e2}},
                                                           data.support_gap(), no_tail_check);
            const auto chi = ContactSolver(two, omega, params.theta2, h).evaluate(pc);
            const auto E1 = electron(t.e1, b1, c.e1, omega, h);
            for (int p = 0; p < 4; ++p)
                for (int r = 0; r < 2; ++r)
                    out[index(p, r)] += chi[p] * E1[r];
        }
        return out;
    }
    auto slice = make_cache<8>([&](double y) {
        std::array<cplx, 8> r{};
        for (int b1 = 0; b1 < 2; ++b1) {
            const TwoBodyInitialData two(
                [&data, y, b1](int m, double x, double z) { return data(4 * (m >> 1) + 2 * b1 + (m & 1), x, y, z); },
                data.support_gap());
            const auto chi = ContactSolver(two, omega, params.theta2, h).evaluate(pc);
            for (int q = 0; q < 4; ++q)
                r[4 * b1 + q] = chi[q];
        }
        return r;
    });
    for (int q = 0; q < 4; ++q) {
        auto m = [&](double y) { return slice(y)[q]; };
        auto p = [&](double y) { return slice(y)[4 + q]; };
        const auto e = detail::dirac_point_impl(m, p, omega, c.e1.t, c.e1.s, h, 0.0);
        out[index(q, 0)] = e[0];
        out[index(q, 1)] = e[1];
    }
    return out;
}

} // namespace

ThreeBodyValues evolve_free_3(const ThreeBodyInitialData& data, const PhysicalParams& params,
                              const ThreeBodyConfig& c, double quadrature_spacing)
{
    if (classify_three_body(c) != RegionLabel::Free)
        throw DomainError("evolve_free_3: configuration is not in the free region");
    if (!data.terms().empty())
        return free_terms(data, params.omega(), c, quadrature_spacing);
    return free_generic(data, params.omega(), c, quadrature_spacing);
}

ThreeBodyValues evolve_compton(const ThreeBodyInitialData& data, const PhysicalParams& params,
                               const ThreeBodyConfig& c, int which_case, double quadrature_spacing)
{
    const RegionLabel expected[] = {RegionLabel::Compton1, RegionLabel::Compton2, RegionLabel::Compton3};
    if (which_case < 1 || which_case > 3)
        throw DomainError("evolve_compton: case must be 1, 2 or 3");
    if (classify_three_body(c) != expected[which_case - 1])
        throw DomainError("evolve_compton: configuration does not belong to the requested case");
    const double h = quadrature_spacing;
    if (which_case == 1)
        return left_pair(data, params, c, h);
    if (which_case == 2)
        return right_pair(data, params, c, h);
    const auto l = left_pair(data, params, c, h);
    const auto r = right_pair(data, params, c, h);
    ThreeBodyValues out{};
    for (int k = 0; k < 8; ++k)
        out[k] = k < 4 ? l[k] : r[k];
    return out;
}

ThreeBodyValues evolve_exact(const ThreeBodyInitialData& data, const PhysicalParams& params,
                             const ThreeBodyConfig& c, double quadrature_spacing)
{
    switch (classify_three_body(c)) {
    case RegionLabel::Free: return evolve_free_3(data, params, c, quadrature_spacing);
    case RegionLabel::Compton1: return evolve_compton(data, params, c, 1, quadrature_spacing);
    case RegionLabel::Compton2: return evolve_compton(data, params, c, 2, quadrature_spacing);
    case RegionLabel::Compton3: return evolve_compton(data, params, c, 3, quadrature_spacing);
    case RegionLabel::Coulomb: break;
    }
    throw ContractViolation("no exact formula in the Coulomb region");
}

TransitionFunction::TransitionFunction(double epsilon) : eps_(epsilon)
{
    if (!(epsilon > 0.0))
        throw DomainError("transition function: epsilon must be positive");
}

double TransitionFunction::operator()(double d) const
{
    if (d < 0.0)
        throw DomainError("transition function: negative distance");
    if (d <= eps_)
        return 0.0;
    if (d >= 2.0 * eps_)
        return 1.0;
    const double u = (d - eps_) / eps_;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double mu_eval(const TransitionFunction& mu, double d) { return mu(d); }

long truncation_count(double T, double epsilon)
{
    if (!(T >= 0.0) || !(epsilon > 0.0))
        throw DomainError("truncation_count: need T >= 0 and epsilon > 0");
    return static_cast<long>(std::ceil(1.0 + 2.0 * T / epsilon - 1e-9));
}

} // namespace mtqm
