#include "mtqm/two_body.hpp"

#include <algorithm>
#include <cmath>

#include "mtqm/parallel.hpp"

namespace mtqm {

cplx Gaussian::operator()(double s) const
{
    const double u = (s - center) / width;
    const double a = std::exp(-0.5 * u * u);
    if (momentum == 0.0)
        return cplx(a, 0.0);
    return std::polar(a, momentum * s);
}

void require_two_body_s1(const TwoBodyConfig& c)
{
    const double ds = c.e.s - c.ph.s;
    if (!(ds > 0.0))
        throw DomainError("two-body configuration: photon must be left of the electron");
    if (!(std::abs(c.e.t - c.ph.t) < ds))
        throw DomainError("two-body configuration: photon and electron must be spacelike separated");
}

TwoBodyRegion classify_two_body(const TwoBodyConfig& c)
{
    require_two_body_s1(c);
    return c.ph.s + c.ph.t <= c.e.s - c.e.t ? TwoBodyRegion::Far : TwoBodyRegion::Near;
}

TwoBodyInitialData::TwoBodyInitialData(Fn f, double support_gap) : f_(std::move(f)), gap_(support_gap)
{
    if (!(support_gap > 0.0))
        throw DomainError("two-body data: support gap must be positive");
}

TwoBodyInitialData TwoBodyInitialData::gaussians(std::vector<Term> terms, double support_gap, double tail_tolerance)
{
    double peak = 0.0, tail = 0.0;
    for (const auto& t : terms) {
        if (t.comp < 0 || t.comp > 3)
            throw DomainError("two-body data: component index out of range");
        if (!(t.photon.width > 0.0) || !(t.electron.width > 0.0))
            throw DomainError("two-body data: widths must be positive");
        const double a = std::abs(t.amplitude);
        peak = std::max(peak, a);
        const double sep = t.electron.center - t.photon.center - support_gap;
        const double var = t.photon.width * t.photon.width + t.electron.width * t.electron.width;
        tail += sep <= 0.0 ? a : a * std::exp(-0.5 * sep * sep / var);
    }
    if (peak > 0.0 && tail > tail_tolerance * peak)
        throw DomainError("two-body data: support reaches within the support gap of the diagonal");
    auto f = [terms](int comp, double x, double y) {
        cplx v(0.0);
        for (const auto& t : terms)
            if (t.comp == comp)
                v += t.amplitude * t.photon(x) * t.electron(y);
        return v;
    };
    TwoBodyInitialData d(f, support_gap);
    d.terms_ = std::move(terms);
    return d;
}

struct ContactSolver::Lines {
    double r = 0.0;
    SampledField1D F; // psi_{+-} on the line where the electron meets the photon foot
    SampledField1D G; // e^{i theta} psi_{-+} on the coincidence diagonal

    double t_max() const { return F.grid().point(F.grid().count() - 3); }
};

namespace {

struct LineReader {
    const SampledField1D& f;
    cplx operator()(double x) const
    {
        const Grid1D& g = f.grid();
        const double u = x / g.spacing();
        const double r = std::round(u);
        if (std::abs(u - r) < detail::snap_tolerance && r >= 0.0 && r < static_cast<double>(g.count()))
            return f[static_cast<std::size_t>(r)];
        return interpolate(f, x);
    }
};

long long line_key(double r) { return std::llround(r * 1e9); }

} // namespace

ContactSolver::ContactSolver(TwoBodyInitialData data, double omega, double theta, double quadrature_spacing)
    : data_(std::move(data)), omega_(omega), theta_(theta), h_(quadrature_spacing)
{
    if (!(omega >= 0.0))
        throw DomainError("ContactSolver: omega must be non-negative");
    if (!(quadrature_spacing > 0.0))
        throw DomainError("ContactSolver: quadrature spacing must be positive");
}

std::array<cplx, 2> ContactSolver::far_plus(double r, double t, double s) const
{
    auto m = [&](double sigma) { return data_(2, r, sigma); };
    auto p = [&](double sigma) { return data_(3, r, sigma); };
    return detail::dirac_point_impl(m, p, omega_, t, s, h_, 0.0);
}

TwoBodyValues ContactSolver::evolve_far(const TwoBodyConfig& c) const
{
    if (classify_two_body(c) != TwoBodyRegion::Far)
        throw DomainError("evolve_far: configuration is Near");
    return evaluate_with(c, nullptr);
}

std::shared_ptr<ContactSolver::Lines> ContactSolver::build_lines(double r, double t_max) const
{
    const std::size_t n = static_cast<std::size_t>(std::ceil(t_max / h_ - detail::snap_tolerance)) + 3;
    const Grid1D g(0.0, h_, n);
    std::vector<cplx> F(n), G(n);
    const cplx phase = std::polar(1.0, theta_);
    for (std::size_t k = 0; k < n; ++k) {
        const double b = g.point(k);
        F[k] = far_plus(r, b, r + b)[0];
        auto m = [&](double sigma) { return data_(0, r - 2.0 * b, sigma); };
        auto p = [&](double sigma) { return data_(1, r - 2.0 * b, sigma); };
        G[k] = phase * detail::dirac_point_impl(m, p, omega_, b, r - b, h_, 0.0)[1];
    }
    auto L = std::make_shared<Lines>();
    L->r = r;
    L->F = SampledField1D(g, std::move(F), false);
    L->G = SampledField1D(g, std::move(G), false);
    return L;
}

cplx ContactSolver::near_plus_minus(const Lines& L, double t, double s_rel) const
{
    const LineReader F{L.F}, G{L.G};
    return detail::goursat_right_impl(F, omega_, t, s_rel, h_) + detail::goursat_right_impl(G, omega_, t, -s_rel, h_);
}

TwoBodyValues ContactSolver::evaluate_with(const TwoBodyConfig& c, const Lines* lines) const
{
    require_two_body_s1(c);
    TwoBodyValues out{};
    {
        const double p = c.ph.s - c.ph.t;
        auto m = [&](double sigma) { return data_(0, p, sigma); };
        auto q = [&](double sigma) { return data_(1, p, sigma); };
        const auto v = detail::dirac_point_impl(m, q, omega_, c.e.t, c.e.s, h_, 0.0);
        out[0] = v[0];
        out[1] = v[1];
    }
    const double r = c.ph.s + c.ph.t;
    const double t = c.e.t;
    const double s_rel = c.e.s - r;
    if (s_rel >= t) {
        const auto v = far_plus(r, t, c.e.s);
        out[2] = v[0];
        out[3] = v[1];
        return out;
    }

    std::shared_ptr<Lines> own;
    if (lines == nullptr || line_key(lines->r) != line_key(r) || lines->t_max() < t) {
        own = build_lines(r, t);
        lines = own.get();
    }
    out[2] = near_plus_minus(*lines, t, s_rel);

    // psi_{++} along its left-moving characteristic: free part before the crossing, Goursat after.
    const double u = c.e.s + t;
    const double tau_star = 0.5 * (s_rel + t);
    auto free_part = [&](double tau) { return far_plus(r, tau, u - tau)[0]; };
    auto near_part = [&](double tau) { return near_plus_minus(*lines, tau, std::min(u - tau - r, tau)); };
    const cplx integral =
        integrate_lattice(free_part, 0.0, tau_star, 0.0, h_) + integrate_lattice(near_part, tau_star, t, 0.0, h_);
    out[3] = data_(3, r, u) - cplx(0.0, omega_) * integral;
    return out;
}

TwoBodyValues ContactSolver::evaluate(const TwoBodyConfig& c) const { return evaluate_with(c, nullptr); }

cplx ContactSolver::left_line_term(const TwoBodyConfig& c) const
{
    if (classify_two_body(c) != TwoBodyRegion::Near)
        throw DomainError("left_line_term: configuration is Far");
    const double r = c.ph.s + c.ph.t;
    const auto L = build_lines(r, c.e.t);
    const LineReader G{L->G};
    return detail::goursat_right_impl(G, omega_, c.e.t, -(c.e.s - r), h_);
}

std::vector<TwoBodyValues> ContactSolver::evaluate_batch(const std::vector<TwoBodyConfig>& configs) const
{
    std::map<long long, std::pair<double, double>> need; // key -> (r, t_max)
    for (const auto& c : configs) {
        require_two_body_s1(c);
        const double r = c.ph.s + c.ph.t;
        if (c.e.s - r >= c.e.t)
            continue;
        auto [it, inserted] = need.try_emplace(line_key(r), r, c.e.t);
        if (!inserted)
            it->second.second = std::max(it->second.second, c.e.t);
    }
    std::vector<long long> keys;
    std::vector<std::pair<double, double>> specs;
    for (const auto& [k, v] : need) {
        keys.push_back(k);
        specs.push_back(v);
    }
    std::vector<std::shared_ptr<Lines>> built(keys.size());
    parallel_for(keys.size(), [&](std::size_t i) { built[i] = build_lines(specs[i].first, specs[i].second); });
    std::map<long long, const Lines*> index;
    for (std::size_t i = 0; i < keys.size(); ++i)
        index[keys[i]] = built[i].get();

    std::vector<TwoBodyValues> out(configs.size());
    parallel_for(configs.size(), [&](std::size_t i) {
        const auto& c = configs[i];
        const auto it = index.find(line_key(c.ph.s + c.ph.t));
        out[i] = evaluate_with(c, it == index.end() ? nullptr : it->second);
    });
    return out;
}

TwoBodyValues evolve_far(const TwoBodyInitialData& data, const PhysicalParams& params, const TwoBodyConfig& c,
                         double quadrature_spacing)
{
    return ContactSolver(data, params.omega(), params.theta1, quadrature_spacing).evolve_far(c);
}

TwoBodyValues contact_evolve(const TwoBodyInitialData& data, const PhysicalParams& params, const TwoBodyConfig& c,
                             double quadrature_spacing)
{
    return ContactSolver(data, params.omega(), params.theta1, quadrature_spacing).evaluate(c);
}

TwoBodyField tabulate_two_body(const ContactSolver& solver, double t_ph, double t_e, const Grid1D& grid_ph,
                               const Grid1D& grid_e)
{
    TwoBodyField f;
    f.t_ph = t_ph;
    f.t_e = t_e;
    f.grid_ph = grid_ph;
    f.grid_e = grid_e;
    const std::size_t n = grid_ph.count() * grid_e.count();
    for (auto& c : f.comps)
        c.assign(n, cplx(0.0));
    const double tiny = 1e-7 * std::min(grid_ph.spacing(), grid_e.spacing());

    std::vector<TwoBodyConfig> configs;
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < grid_ph.count(); ++i)
        for (std::size_t j = 0; j < grid_e.count(); ++j) {
            TwoBodyConfig c{{t_ph, grid_ph.point(i)}, {t_e, grid_e.point(j)}};
            const double ds = c.e.s - c.ph.s;
            // Diagonal nodes at equal times carry the limit from inside the region.
            if (std::abs(ds) < tiny && t_ph == t_e)
                c.ph.s -= tiny;
            else if (!(ds > std::abs(t_e - t_ph)))
                continue;
            configs.push_back(c);
            slots.push_back(i * grid_e.count() + j);
        }
    const auto vals = solver.evaluate_batch(configs);
    for (std::size_t k = 0; k < slots.size(); ++k)
        for (int c = 0; c < 4; ++c)
            f.comps[c][slots[k]] = vals[k][c];
    return f;
}

double two_body_probability(const TwoBodyField& field)
{
    const double hx = field.grid_ph.spacing(), hy = field.grid_e.spacing();
    const double tiny = 1e-7 * std::min(hx, hy);
    double sum = 0.0;
    for (std::size_t i = 0; i < field.grid_ph.count(); ++i)
        for (std::size_t j = 0; j < field.grid_e.count(); ++j) {
            const double ds = field.grid_e.point(j) - field.grid_ph.point(i);
            if (ds < -tiny)
                continue;
            double d = 0.0;
            for (int c = 0; c < 4; ++c)
                d += std::norm(field.at(c, i, j));
            sum += (ds < tiny ? 0.5 : 1.0) * d;
        }
    return sum * hx * hy;
}

double boundary_residual_2body(const std::function<TwoBodyValues(const TwoBodyConfig&)>& field, double t,
                               const std::vector<double>& diagonal_positions, double theta, double d)
{
    const cplx phase = std::polar(1.0, theta);
    double worst = 0.0;
    for (double x : diagonal_positions) {
        cplx D[3];
        for (int k = 0; k < 3; ++k) {
            const auto v = field({{t, x - (k + 1) * d}, {t, x}});
            D[k] = v[2] - phase * v[1];
        }
        worst = std::max(worst, std::abs(3.0 * D[0] - 3.0 * D[1] + D[2]));
    }
    return worst;
}

double boundary_residual_2body(const TwoBodyField& field, double theta)
{
    const double h = field.grid_e.spacing();
    if (field.grid_ph.spacing() != h)
        throw DomainError("boundary_residual_2body: axes must share a spacing");
    const double shift = (field.grid_ph.origin() - field.grid_e.origin()) / h;
    if (std::abs(shift - std::round(shift)) > detail::snap_tolerance)
        throw DomainError("boundary_residual_2body: axes must share a lattice");
    const long off = std::lround(shift);
    const cplx phase = std::polar(1.0, theta);
    double worst = 0.0;
    const long nph = static_cast<long>(field.grid_ph.count());
    for (std::size_t j = 0; j < field.grid_e.count(); ++j) {
        const long i1 = static_cast<long>(j) - off - 1;
        if (i1 - 2 < 0 || i1 >= nph)
            continue;
        auto D = [&](long i) { return field.at(2, i, j) - phase * field.at(1, i, j); };
        worst = std::max(worst, std::abs(3.0 * D(i1) - 3.0 * D(i1 - 1) + D(i1 - 2)));
    }
    return worst;
}

} // namespace mtqm
