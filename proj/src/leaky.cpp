#include <algorithm>
#include <cmath>

#include "mtqm/parallel.hpp"
#include "mtqm/three_body.hpp"

namespace mtqm {

namespace {

constexpr double lattice_tol = 1e-9;

long lattice_steps(double dt, double h, const char* what)
{
    const double m = std::round(dt / h);
    if (std::abs(m * h - dt) > lattice_tol * std::max(1.0, dt))
        throw DomainError(std::string(what) + ": not a multiple of the grid spacing");
    return static_cast<long>(m);
}

void rotate_node(cplx* p, double c, cplx is)
{
    auto mix = [&](cplx& a, cplx& b) {
        const cplx x = a, y = b;
        a = c * x - is * y;
        b = c * y - is * x;
    };
    mix(p[0], p[2]);
    mix(p[1], p[3]);
    mix(p[4], p[6]);
    mix(p[5], p[7]);
    mix(p[0], p[1]);
    mix(p[2], p[3]);
    mix(p[4], p[5]);
    mix(p[6], p[7]);
}

// Per-node rotation exp(-i a sigma_x) on both electron spinor indices.
void rotate(std::vector<cplx>& v, const WedgeGrid& g, double a)
{
    const double c = std::cos(a);
    const cplx is(0.0, std::sin(a));
    const long rows = g.ph_hi() - g.ph_lo() + 1;
    parallel_for(static_cast<std::size_t>(rows), [&](std::size_t r) {
        const long i = g.ph_lo() + static_cast<long>(r);
        const std::size_t b = g.begin(i), e = b + g.row(i) * static_cast<std::size_t>(i - g.e1_lo() + 1);
        for (std::size_t n = b; n < e; ++n)
            rotate_node(&v[8 * n], c, is);
    });
}

// Backward characteristic tracing in half-lattice units. Positions and remaining time are
// integers; wall hits always happen at integer half-times.
struct Transport {
    const ThreeBodyField& src;
    const TransitionFunction& mu;
    cplx phase1, phase2;
    double half; // h / 2

    cplx foot(int comp, long x, long y, long z) const { return src.get(comp, x / 2, y / 2, z / 2); }

    cplx value(int comp, long x, long y, long z, long rem) const
    {
        const int b0 = comp >> 2, b1 = (comp >> 1) & 1, b2 = comp & 1;
        const long s0 = b0 ? 1 : -1, s1 = b1 ? 1 : -1, s2 = b2 ? 1 : -1;
        long tw = -1;
        int flip = 0;
        cplx phase;
        if (b0 == 0 && b1 == 1) {
            tw = (x - y) / 2;
            flip = 6;
            phase = phase1;
        } else if (b0 == 1 && b2 == 0) {
            tw = (z - x) / 2;
            flip = 5;
            phase = phase2;
        }
        if (tw < 0 || tw > rem)
            return foot(comp, x + s0 * rem, y + s1 * rem, z + s2 * rem);

        const long hx = x + s0 * tw, hy = y + s1 * tw, hz = z + s2 * tw;
        const double m = mu(static_cast<double>(hz - hy) * half);
        const cplx reflected = m == 0.0 ? cplx(0.0) : m * phase * value(comp ^ flip, hx, hy, hz, rem - tw);
        if (tw < rem)
            return reflected;
        // The characteristic ends exactly on the wall: average the two one-sided values.
        return 0.5 * (foot(comp, hx, hy, hz) + reflected);
    }
};

void transport(const ThreeBodyField& src, std::vector<cplx>& dst, const PhysicalParams& params,
               const TransitionFunction& mu, long steps)
{
    const WedgeGrid& g = src.grid;
    const Transport tr{src, mu, std::polar(1.0, params.theta1), std::polar(1.0, params.theta2), 0.5 * g.spacing()};
    const long rem = 2 * steps;
    const long rows = g.ph_hi() - g.ph_lo() + 1;
    parallel_for(static_cast<std::size_t>(rows), [&](std::size_t r) {
        const long i = g.ph_lo() + static_cast<long>(r);
        std::size_t n = g.begin(i);
        for (long j = g.e1_lo(); j <= i; ++j)
            for (long k = i; k <= g.e2_hi(); ++k, ++n)
                for (int c = 0; c < 8; ++c)
                    dst[8 * n + c] = tr.value(c, 2 * i, 2 * j, 2 * k, rem);
    });
}

double weighted_sum(const WedgeGrid& g, const std::function<double(std::size_t)>& f)
{
    const long rows = g.ph_hi() - g.ph_lo() + 1;
    std::vector<double> partial(static_cast<std::size_t>(rows), 0.0);
    parallel_for(partial.size(), [&](std::size_t r) {
        const long i = g.ph_lo() + static_cast<long>(r);
        std::size_t n = g.begin(i);
        double acc = 0.0;
        for (long j = g.e1_lo(); j <= i; ++j)
            for (long k = i; k <= g.e2_hi(); ++k, ++n)
                acc += g.weight(i, j, k) * f(n);
        partial[r] = acc;
    });
    double total = 0.0;
    for (double p : partial)
        total += p;
    const double h = g.spacing();
    return total * h * h * h;
}

void require_step(const ThreeBodyField& state, const TransitionFunction& mu, double dt)
{
    if (!(dt > 0.0))
        throw DomainError("leaky step: dt must be positive");
    if (dt > 0.5 * mu.epsilon() * (1.0 + 1e-12))
        throw ContractViolation("leaky step: dt exceeds eps/2");
    lattice_steps(dt, state.grid.spacing(), "leaky step");
}

} // namespace

WedgeGrid::WedgeGrid(double spacing, long ph_lo, long ph_hi, long e1_lo, long e2_hi)
    : h_(spacing), i0_(ph_lo), i1_(ph_hi), j0_(e1_lo), k1_(e2_hi)
{
    if (!(spacing > 0.0))
        throw DomainError("wedge grid: spacing must be positive");
    if (ph_hi < ph_lo || e1_lo > ph_lo || e2_hi < ph_hi)
        throw DomainError("wedge grid: need e1_lo <= ph_lo <= ph_hi <= e2_hi");
    offset_.reserve(static_cast<std::size_t>(i1_ - i0_ + 1));
    for (long i = i0_; i <= i1_; ++i) {
        offset_.push_back(size_);
        size_ += static_cast<std::size_t>(i - j0_ + 1) * row(i);
    }
}

WedgeGrid WedgeGrid::covering(double spacing, double ph_lo, double ph_hi, double e1_lo, double e2_hi)
{
    if (!(spacing > 0.0))
        throw DomainError("wedge grid: spacing must be positive");
    auto lo = [&](double x) { return static_cast<long>(std::floor(x / spacing + lattice_tol)); };
    auto hi = [&](double x) { return static_cast<long>(std::ceil(x / spacing - lattice_tol)); };
    return WedgeGrid(spacing, lo(ph_lo), hi(ph_hi), lo(e1_lo), hi(e2_hi));
}

ThreeBodyValues ThreeBodyField::node(std::size_t n) const
{
    ThreeBodyValues v;
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(8 * n), 8, v.begin());
    return v;
}

ThreeBodyField sample_three_body(const ThreeBodyInitialData& data, const WedgeGrid& grid)
{
    ThreeBodyField f(grid, 0.0);
    const double h = grid.spacing();
    const long rows = grid.ph_hi() - grid.ph_lo() + 1;
    parallel_for(static_cast<std::size_t>(rows), [&](std::size_t r) {
        const long i = grid.ph_lo() + static_cast<long>(r);
        std::size_t n = grid.begin(i);
        for (long j = grid.e1_lo(); j <= i; ++j)
            for (long k = i; k <= grid.e2_hi(); ++k, ++n)
                for (int c = 0; c < 8; ++c)
                    f.values[8 * n + c] = data(c, i * h, j * h, k * h);
    });
    return f;
}

double norm_squared(const ThreeBodyField& f)
{
    return weighted_sum(f.grid, [&](std::size_t n) {
        double s = 0.0;
        for (int c = 0; c < 8; ++c)
            s += std::norm(f.values[8 * n + c]);
        return s;
    });
}

double l2_distance(const ThreeBodyField& a, const ThreeBodyField& b)
{
    if (!(a.grid == b.grid))
        throw DomainError("l2_distance: fields live on different grids");
    return std::sqrt(weighted_sum(a.grid, [&](std::size_t n) {
        double s = 0.0;
        for (int c = 0; c < 8; ++c)
            s += std::norm(a.values[8 * n + c] - b.values[8 * n + c]);
        return s;
    }));
}

ThreeBodyValues interpolate(const ThreeBodyField& f, double s_ph, double s_e1, double s_e2)
{
    ThreeBodyValues out{};
    const double h = f.grid.spacing();
    const double u[3] = {s_ph / h, (s_ph - s_e1) / h, (s_e2 - s_ph) / h};
    if (u[1] < -lattice_tol || u[2] < -lattice_tol)
        return out;
    long base[3];
    double w[3][4];
    for (int d = 0; d < 3; ++d) {
        // The gap coordinates are clamped at the walls, the photon coordinate is not.
        const double x = d > 0 ? std::max(0.0, u[d]) : u[d];
        long b = static_cast<long>(std::floor(x + lattice_tol)) - 1;
        if (d > 0)
            b = std::max(0L, b);
        base[d] = b;
        const double r = x - static_cast<double>(b);
        for (int a = 0; a < 4; ++a) {
            double l = 1.0;
            for (int c = 0; c < 4; ++c)
                if (c != a)
                    l *= (r - c) / static_cast<double>(a - c);
            w[d][a] = l;
        }
    }
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                const long i = base[0] + a;
                const long j = i - (base[1] + b), k = i + base[2] + c;
                if (!f.grid.contains(i, j, k))
                    continue;
                const double wt = w[0][a] * w[1][b] * w[2][c];
                const std::size_t n = f.grid.index(i, j, k);
                for (int q = 0; q < 8; ++q)
                    out[q] += wt * f.values[8 * n + q];
            }
    return out;
}

ThreeBodyField parity_exchange(const ThreeBodyField& f)
{
    const WedgeGrid& g = f.grid;
    if (g.ph_lo() != -g.ph_hi() || g.e1_lo() != -g.e2_hi())
        throw DomainError("parity_exchange: grid is not mirror symmetric");
    ThreeBodyField out(g, f.t);
    g.for_each([&](long i, long j, long k, std::size_t n) {
        const std::size_t m = g.index(-i, -k, -j);
        for (int c = 0; c < 8; ++c) {
            const int b0 = c >> 2, b1 = (c >> 1) & 1, b2 = c & 1;
            out.values[8 * n + c] = f.values[8 * m + 4 * (1 - b0) + 2 * (1 - b2) + (1 - b1)];
        }
    });
    return out;
}

ThreeBodyField leaky_step(const ThreeBodyField& state, const PhysicalParams& params, const TransitionFunction& mu,
                          double dt, ThreeBodyField* trace)
{
    require_step(state, mu, dt);
    const long m = lattice_steps(dt, state.grid.spacing(), "leaky step");
    const double a = 0.5 * params.omega() * dt;
    ThreeBodyField src = state;
    rotate(src.values, src.grid, a);
    ThreeBodyField out(state.grid, state.t + dt);
    transport(src, out.values, params, mu, m);
    if (trace)
        *trace = out;
    rotate(out.values, out.grid, a);
    return out;
}

ThreeBodyValues mass_rotation(const ThreeBodyValues& v, double angle)
{
    ThreeBodyValues out = v;
    rotate_node(out.data(), std::cos(angle), cplx(0.0, std::sin(angle)));
    return out;
}

ThreeBodyField boundary_trace(const ThreeBodyField& state, const PhysicalParams& params, double dt)
{
    ThreeBodyField out = state;
    rotate(out.values, out.grid, -0.5 * params.omega() * dt);
    return out;
}

LeakyRun leaky_evolve(const ThreeBodyField& initial, const PhysicalParams& params, const TransitionFunction& mu,
                      double T, double step, const LeakyObserver& observer)
{
    const double h = initial.grid.spacing();
    if (step == 0.0)
        step = h * std::floor(0.5 * mu.epsilon() / h + lattice_tol);
    if (!(step > 0.0))
        throw ContractViolation("leaky_evolve: grid spacing exceeds eps/2");
    require_step(initial, mu, step);
    const long total = lattice_steps(T, h, "leaky_evolve: final time");
    const long per = lattice_steps(step, h, "leaky_evolve: step");

    LeakyRun run;
    run.step = step;
    ThreeBodyField a = initial, b(initial.grid, initial.t);
    const double t0 = initial.t;
    run.times.push_back(t0);
    run.norms.push_back(std::sqrt(norm_squared(a)));
    if (observer)
        observer(t0, a, boundary_trace(a, params, std::min(total, per) * h));

    for (long done = 0; done < total;) {
        const long m = std::min(per, total - done);
        const double dt = static_cast<double>(m) * h;
        const double angle = 0.5 * params.omega() * dt;
        rotate(a.values, a.grid, angle);
        transport(a, b.values, params, mu, m);
        done += m;
        b.t = a.t = t0 + static_cast<double>(done) * h;
        a.values = b.values;
        rotate(a.values, a.grid, angle);
        run.times.push_back(a.t);
        run.norms.push_back(std::sqrt(norm_squared(a)));
        if (observer)
            observer(a.t, a, b);
    }
    run.final_state = std::move(a);
    return run;
}

std::vector<ConvergenceRow> convergence_study(const ThreeBodyField& initial, const PhysicalParams& params, double T,
                                              const std::vector<double>& ladder)
{
    if (ladder.empty())
        throw DomainError("convergence_study: empty epsilon ladder");
    const double h = initial.grid.spacing();
    const double smallest = *std::min_element(ladder.begin(), ladder.end());
    const double step = h * std::floor(0.5 * smallest / h + lattice_tol);
    if (!(step > 0.0))
        throw ContractViolation("convergence_study: grid spacing exceeds eps/2 for the smallest eps");
    const double n0 = norm_squared(initial);

    std::vector<ConvergenceRow> rows;
    ThreeBodyField previous;
    for (std::size_t r = 0; r < ladder.size(); ++r) {
        auto run = leaky_evolve(initial, params, TransitionFunction(ladder[r]), T, step);
        ConvergenceRow row;
        row.epsilon = ladder[r];
        row.step = step;
        row.norm = run.norms.back();
        row.leaked = n0 - row.norm * row.norm;
        if (r > 0)
            rows.back().gap_to_next = l2_distance(previous, run.final_state);
        rows.push_back(row);
        previous = std::move(run.final_state);
    }
    return rows;
}

} // namespace mtqm
