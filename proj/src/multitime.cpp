#include <algorithm>
#include <cmath>
#include <memory>

#include "mtqm/parallel.hpp"
#include "mtqm/three_body.hpp"

namespace mtqm {

ThreeBodyInitialData as_initial_data(const ThreeBodyField& f)
{
    // The solvers ask for the components of one point in turn; keep the last point.
    struct Last {
        double x = NAN, y = NAN, z = NAN;
        ThreeBodyValues v{};
    };
    auto field = std::make_shared<const ThreeBodyField>(f);
    auto last = std::make_shared<Last>();
    return ThreeBodyInitialData(
        [field, last](int comp, double x, double y, double z) {
            if (x != last->x || y != last->y || z != last->z) {
                last->v = interpolate(*field, x, y, z);
                last->x = x;
                last->y = y;
                last->z = z;
            }
            return last->v[comp];
        },
        f.grid.spacing());
}

namespace {

// Equal-time field from the exact formulas on the nodes the second leg can reach.
ThreeBodyField exact_leg(const ThreeBodyInitialData& data, const PhysicalParams& params, const ThreeBodyConfig& c,
                         double t, double h, double hq)
{
    const double margin = 4.0 * h;
    const double rph = c.ph.t - t, r1 = c.e1.t - t, r2 = c.e2.t - t;
    const auto grid = WedgeGrid::covering(h, c.ph.s - rph - margin, c.ph.s + rph + margin,
                                          c.e1.s - r1 - margin, c.e2.s + r2 + margin);
    ThreeBodyField f(grid, t);
    // Restrict to the box around the configuration; nodes outside stay zero.
    const double y_hi = c.e1.s + r1 + margin, z_lo = c.e2.s - r2 - margin;
    std::vector<std::array<long, 3>> nodes;
    grid.for_each([&](long i, long j, long k, std::size_t) {
        if (j * h <= y_hi && k * h >= z_lo)
            nodes.push_back({i, j, k});
    });
    parallel_for(nodes.size(), [&](std::size_t n) {
        const auto [i, j, k] = nodes[n];
        // Wall nodes take the one-sided limit.
        const double x = i * h, y = j == i ? x - 1e-10 : j * h, z = k == i ? x + 1e-10 : k * h;
        const auto v = evolve_exact(data, params, {{t, x}, {t, y}, {t, z}}, hq);
        const std::size_t m = grid.index(i, j, k);
        std::copy(v.begin(), v.end(), f.values.begin() + static_cast<std::ptrdiff_t>(8 * m));
    });
    return f;
}

} // namespace

ThreeBodyValues multitime_eval(const ThreeBodyInitialData& data, const PhysicalParams& params,
                               const ThreeBodyConfig& c, const MultiTimeOptions& options)
{
    require_three_body_s1(c);
    const double t = std::min({c.ph.t, c.e1.t, c.e2.t});
    if (t < 0.0)
        throw DomainError("multitime_eval: negative time");
    const double hq = options.quadrature_spacing;
    if (t == 0.0)
        return evolve_exact(data, params, c, hq);

    ThreeBodyField field;
    if (options.leg == MultiTimeOptions::Leg::Leaky) {
        if (options.grid.size() == 0)
            throw DomainError("multitime_eval: the leaky leg needs a grid");
        const auto initial = sample_three_body(data, options.grid);
        field = leaky_evolve(initial, params, TransitionFunction(options.epsilon), t).final_state;
    } else {
        const double h = options.grid.size() ? options.grid.spacing() : hq;
        field = exact_leg(data, params, c, t, h, hq);
    }

    const ThreeBodyConfig rest{{c.ph.t - t, c.ph.s}, {c.e1.t - t, c.e1.s}, {c.e2.t - t, c.e2.s}};
    if (rest.ph.t == 0.0 && rest.e1.t == 0.0 && rest.e2.t == 0.0)
        return interpolate(field, c.ph.s, c.e1.s, c.e2.s);
    if (classify_three_body(rest) == RegionLabel::Coulomb)
        throw ContractViolation("multitime_eval: second leg lands in the Coulomb region");
    return evolve_exact(as_initial_data(field), params, rest, hq);
}

} // namespace mtqm
