#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtqm/parallel.hpp"
#include "mtqm/verification.hpp"

namespace mtqm {

namespace {

constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

double sq(cplx z) { return std::norm(z); }

// Outgoing then incoming component pairs of each wall.
constexpr int c1_out[2] = {2, 3}, c1_in[2] = {4, 5};
constexpr int c2_out[2] = {4, 6}, c2_in[2] = {1, 3};

// Sum over the wall nodes of weight * f(i, j, k, flat index), rows in parallel.
template <class F>
double wall_sum(const WedgeGrid& g, Wall wall, F&& f)
{
    std::vector<double> partial(static_cast<std::size_t>(g.ph_hi() - g.ph_lo() + 1), 0.0);
    parallel_for(partial.size(), [&](std::size_t r) {
        const long i = g.ph_lo() + static_cast<long>(r);
        double acc = 0.0;
        if (wall == Wall::C1) {
            if (i >= g.e1_lo())
                for (long k = i; k <= g.e2_hi(); ++k)
                    acc += (k == i ? 0.5 : 1.0) * f(i, i, k, g.index(i, i, k));
        } else {
            for (long j = g.e1_lo(); j <= i; ++j)
                acc += (j == i ? 0.5 : 1.0) * f(i, j, i, g.index(i, j, i));
        }
        partial[r] = acc;
    });
    double total = 0.0;
    for (double p : partial)
        total += p;
    return total;
}

ThreeBodyValues node_values(const ThreeBodyField& f, std::size_t n)
{
    ThreeBodyValues v;
    std::copy_n(f.values.begin() + static_cast<std::ptrdiff_t>(8 * n), 8, v.begin());
    return v;
}

// Loss rate from the incoming components only, after a mass rotation of the given angle.
double incoming_loss_rate(const ThreeBodyField& f, const TransitionFunction& mu, double angle)
{
    const double h = f.grid.spacing();
    double rate = 0.0;
    for (Wall wall : {Wall::C1, Wall::C2})
        rate += wall_sum(f.grid, wall, [&](long, long j, long k, std::size_t n) {
            const auto v = mass_rotation(node_values(f, n), angle);
            return wall_flux_reduced(v, mu(static_cast<double>(k - j) * h), wall);
        });
    return 2.0 * std::numbers::sqrt2 * rate * h * h;
}

} // namespace

CurrentTensor3 current_multitime(const ThreeBodyValues& psi)
{
    CurrentTensor3 out;
    for (int idx = 0; idx < 8; ++idx) {
        const int mu = idx >> 2, nu = (idx >> 1) & 1, kappa = idx & 1;
        double acc = 0.0;
        for (int c = 0; c < 8; ++c) {
            const int flips = (mu & (c >> 2)) + (nu & (c >> 1) & 1) + (kappa & c & 1);
            acc += (flips % 2 ? -1.0 : 1.0) * sq(psi[c]);
        }
        out.j[idx] = 0.25 * acc;
    }
    return out;
}

EqualTimeCurrent current_equal_time(const ThreeBodyValues& psi)
{
    EqualTimeCurrent out;
    for (int c = 0; c < 8; ++c) {
        const double p = sq(psi[c]);
        out.j0 += p;
        out.j1 += (c & 4) ? -p : p;
        out.j2 += (c & 2) ? -p : p;
        out.j3 += (c & 1) ? -p : p;
    }
    return out;
}

double wall_flux(const ThreeBodyValues& psi, Wall wall)
{
    const int* out = wall == Wall::C1 ? c1_out : c2_out;
    const int* in = wall == Wall::C1 ? c1_in : c2_in;
    return inv_sqrt2 * (sq(psi[out[0]]) + sq(psi[out[1]]) - sq(psi[in[0]]) - sq(psi[in[1]]));
}

double wall_flux_reduced(const ThreeBodyValues& psi, double mu, Wall wall)
{
    const int* in = wall == Wall::C1 ? c1_in : c2_in;
    return inv_sqrt2 * (mu * mu - 1.0) * (sq(psi[in[0]]) + sq(psi[in[1]]));
}

WallFluxComparison compare_wall_fluxes(const ThreeBodyField& trace, const TransitionFunction& mu)
{
    const WedgeGrid& g = trace.grid;
    const double h = g.spacing();
    WallFluxComparison out;
    auto visit = [&](Wall wall, long j, long k, std::size_t n) {
        const auto v = node_values(trace, n);
        const double raw = wall_flux(v, wall);
        const double red = wall_flux_reduced(v, mu(static_cast<double>(k - j) * h), wall);
        out.max_difference = std::max(out.max_difference, std::abs(raw - red));
        out.max_flux = std::max(out.max_flux, std::abs(raw));
        ++out.samples;
    };
    for (long i = std::max(g.ph_lo(), g.e1_lo()); i <= g.ph_hi(); ++i)
        for (long k = i; k <= g.e2_hi(); ++k)
            visit(Wall::C1, i, k, g.index(i, i, k));
    for (long i = g.ph_lo(); i <= g.ph_hi(); ++i)
        for (long j = g.e1_lo(); j <= i; ++j)
            visit(Wall::C2, j, i, g.index(i, j, i));
    return out;
}

double wall_loss_rate(const ThreeBodyField& trace)
{
    const double h = trace.grid.spacing();
    double rate = 0.0;
    for (Wall wall : {Wall::C1, Wall::C2})
        rate += wall_sum(trace.grid, wall,
                         [&](long, long, long, std::size_t n) { return wall_flux(node_values(trace, n), wall); });
    return 2.0 * std::numbers::sqrt2 * rate * h * h;
}

double l2_norm_wedge(const ThreeBodyField& f) { return std::sqrt(norm_squared(f)); }

ProbabilityBalance probability_balance(const ThreeBodyField& initial, const PhysicalParams& params,
                                       const TransitionFunction& mu, double T, double step)
{
    if (step == 0.0)
        step = initial.grid.spacing();
    ProbabilityBalance out;
    out.initial_norm2 = norm_squared(initial);
    const double t_end = initial.t + T;
    double start_rate = 0.0, last_t = initial.t;

    // Within a step only the transport moves probability through the walls. Its rate just after
    // the start depends on the incoming components of the half-rotated state; at the end it is
    // the rate of the trace.
    auto observer = [&](double t, const ThreeBodyField& state, const ThreeBodyField& trace) {
        if (t > last_t) {
            const double end_rate = wall_loss_rate(trace);
            out.integrated_flux += 0.5 * (t - last_t) * (start_rate + end_rate);
            const auto check = compare_wall_fluxes(trace, mu);
            out.flux_check.max_difference = std::max(out.flux_check.max_difference, check.max_difference);
            out.flux_check.max_flux = std::max(out.flux_check.max_flux, check.max_flux);
            out.flux_check.samples += check.samples;
        }
        out.times.push_back(t);
        out.norms.push_back(l2_norm_wedge(state));
        out.cumulative_flux.push_back(out.integrated_flux);
        last_t = t;
        const double next = std::min(step, t_end - t);
        if (next > 0.0)
            start_rate = incoming_loss_rate(state, mu, 0.5 * params.omega() * next);
    };
    auto run = leaky_evolve(initial, params, mu, T, step, observer);
    out.final_norm2 = norm_squared(run.final_state);
    out.final_state = std::move(run.final_state);
    return out;
}

JointDivergence joint_divergence(const std::function<ThreeBodyValues(const ThreeBodyConfig&)>& field,
                                 const ThreeBodyConfig& c, double h)
{
    // d/dt and d/ds of the current for one particle by central differences.
    auto derivs = [&](int particle) {
        std::array<CurrentTensor3, 2> d{};
        for (int axis = 0; axis < 2; ++axis) {
            ThreeBodyConfig p = c, m = c;
            SpacetimePoint* pp[3] = {&p.ph, &p.e1, &p.e2};
            SpacetimePoint* mm[3] = {&m.ph, &m.e1, &m.e2};
            (axis == 0 ? pp[particle]->t : pp[particle]->s) += h;
            (axis == 0 ? mm[particle]->t : mm[particle]->s) -= h;
            const auto jp = current_multitime(field(p)), jm = current_multitime(field(m));
            for (int n = 0; n < 8; ++n)
                d[axis].j[n] = (jp.j[n] - jm.j[n]) / (2.0 * h);
        }
        return d;
    };
    JointDivergence out;
    for (double v : current_multitime(field(c)).j)
        out.scale = std::max(out.scale, std::abs(v));
    const auto dph = derivs(0), de1 = derivs(1), de2 = derivs(2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            out.photon = std::max(out.photon, std::abs(dph[0](0, a, b) + dph[1](1, a, b)));
            out.electron1 = std::max(out.electron1, std::abs(de1[0](a, 0, b) + de1[1](a, 1, b)));
            out.electron2 = std::max(out.electron2, std::abs(de2[0](a, b, 0) + de2[1](a, b, 1)));
        }
    return out;
}

ThreeBodyValues transform_components(const ThreeBodyValues& psi, const Transformation& tr)
{
    ThreeBodyValues out{};
    switch (tr.kind) {
    case Transformation::Kind::Boost:
        for (int c = 0; c < 8; ++c) {
            const double s0 = (c & 4) ? 1 : -1, s1 = (c & 2) ? 1 : -1, s2 = (c & 1) ? 1 : -1;
            out[c] = std::exp(-tr.rapidity * (s0 + 0.5 * s1 + 0.5 * s2)) * psi[c];
        }
        break;
    case Transformation::Kind::Parity:
        for (int c = 0; c < 8; ++c)
            out[c] = psi[7 - c];
        break;
    case Transformation::Kind::TimeReversal:
        for (int c = 0; c < 8; ++c)
            out[c] = std::conj(psi[7 - c]);
        break;
    }
    return out;
}

} // namespace mtqm
