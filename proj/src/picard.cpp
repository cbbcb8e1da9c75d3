#include "mtqm/two_body.hpp"

#include <cmath>
#include <sstream>

#include "mtqm/parallel.hpp"

namespace mtqm {

namespace {

struct Lattice {
    Grid1D gp, gs;
    long np, nt, ns;
    double h;

    std::size_t index(int c, long ip, long it, long is) const
    {
        return ((static_cast<std::size_t>(c) * np + ip) * nt + it) * ns + is;
    }
};

long node_of(const Grid1D& g, double x)
{
    const double u = (x - g.origin()) / g.spacing();
    const double r = std::round(u);
    if (std::abs(u - r) > 1e-6)
        throw DomainError("picard: position is not on the lattice");
    return static_cast<long>(r);
}

class Iterate {
public:
    Iterate(const Lattice& L, const std::vector<cplx>& v) : L_(L), v_(v) {}

    cplx at(int c, long ip, long it, long is) const
    {
        if (ip < 0 || ip >= L_.np || it < 0 || it >= L_.nt || is < 0 || is >= L_.ns)
            return cplx(0.0);
        return v_[L_.index(c, ip, it, is)];
    }

    // Value on the diagonal line s = s0 + dir * tau (s0 a lattice node index) at time tau.
    cplx diag(int c, long ip, long is0, int dir, double tau) const
    {
        const double u = tau / L_.h;
        const double r = std::round(u);
        if (std::abs(u - r) < detail::snap_tolerance) {
            const long k = static_cast<long>(r);
            return at(c, ip, k, is0 + dir * k);
        }
        const long k = static_cast<long>(std::floor(u));
        const double x = u - static_cast<double>(k);
        auto node = [&](long j) { return at(c, ip, j, is0 + dir * j); };
        if (k - 1 < 0 || k + 2 >= L_.nt)
            return (1.0 - x) * node(k) + x * node(k + 1);
        const double w0 = -x * (x - 1.0) * (x - 2.0) / 6.0;
        const double w1 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
        const double w2 = -(x + 1.0) * x * (x - 2.0) / 2.0;
        const double w3 = (x + 1.0) * x * (x - 1.0) / 6.0;
        return w0 * node(k - 1) + w1 * node(k) + w2 * node(k + 1) + w3 * node(k + 2);
    }

private:
    const Lattice& L_;
    const std::vector<cplx>& v_;
};

} // namespace

cplx PicardField::get(int comp, long ip, long it, long is) const
{
    const long np = static_cast<long>(grid_p.count()), ns = static_cast<long>(grid_s.count());
    const long ntl = static_cast<long>(nt);
    if (ip < 0 || ip >= np || it < 0 || it >= ntl || is < 0 || is >= ns)
        return cplx(0.0);
    return values[((static_cast<std::size_t>(comp) * np + ip) * ntl + it) * ns + is];
}

TwoBodyValues PicardField::at(const TwoBodyConfig& c) const
{
    require_two_body_s1(c);
    const long it = node_of(Grid1D(0.0, spacing, std::max<std::size_t>(nt, 2)), c.e.t);
    const long is = node_of(grid_s, c.e.s);
    const long ipm = node_of(grid_p, c.ph.s - c.ph.t);
    const long ipp = node_of(grid_p, c.ph.s + c.ph.t);
    if (it < 0 || it >= static_cast<long>(nt))
        throw DomainError("picard: electron time outside the solved horizon");
    return {get(0, ipm, it, is), get(1, ipm, it, is), get(2, ipp, it, is), get(3, ipp, it, is)};
}

PicardField picard_solve(const TwoBodyInitialData& data, const PhysicalParams& params, const PicardGrid& spec,
                         double tol, int max_iter)
{
    const double h = spec.spacing;
    if (!(h > 0.0) || !(spec.T >= 0.0))
        throw DomainError("picard_solve: spacing must be positive and T non-negative");
    const double steps = spec.T / h;
    if (std::abs(steps - std::round(steps)) > 1e-9)
        throw DomainError("picard_solve: T must be a multiple of the spacing");
    const double shift = (spec.p_lo - spec.s_lo) / h;
    if (std::abs(shift - std::round(shift)) > 1e-9)
        throw DomainError("picard_solve: photon and electron lattices must be aligned");

    Lattice L;
    L.gp = Grid1D::covering(spec.p_lo, spec.p_hi, h, spec.s_lo);
    L.gs = Grid1D::covering(spec.s_lo, spec.s_hi, h, spec.s_lo);
    L.np = static_cast<long>(L.gp.count());
    L.ns = static_cast<long>(L.gs.count());
    L.nt = std::lround(steps) + 1;
    L.h = h;
    const long pshift = std::lround((L.gp.origin() - L.gs.origin()) / h); // s index of p node 0

    const double omega = params.omega();
    const cplx phase = std::polar(1.0, params.theta1);
    const cplx mi(0.0, -omega);
    const std::size_t total = 4 * static_cast<std::size_t>(L.np * L.nt * L.ns);
    std::vector<cplx> cur(total, cplx(0.0)), next(total, cplx(0.0));

    PicardField out;
    out.grid_p = L.gp;
    out.grid_s = L.gs;
    out.nt = static_cast<std::size_t>(L.nt);
    out.spacing = h;
    out.gamma = omega > 0.0 ? 8.0 * omega : 1.0;

    for (int iter = 1; iter <= max_iter; ++iter) {
        const Iterate P(L, cur);
        parallel_for(static_cast<std::size_t>(L.np), [&](std::size_t ipu) {
            const long ip = static_cast<long>(ipu);
            const double pval = L.gp.point(ipu);
            for (long it = 0; it < L.nt; ++it) {
                const double t = static_cast<double>(it) * h;
                for (long is = 0; is < L.ns; ++is) {
                    const double s = L.gs.point(static_cast<std::size_t>(is));
                    if (it == 0) {
                        for (int c = 0; c < 4; ++c)
                            next[L.index(c, ip, 0, is)] = data(c, pval, s);
                        continue;
                    }
                    // Photon moving right: free electron transport with the mass coupling.
                    for (int s1 = -1; s1 <= 1; s1 += 2) {
                        const int c = comp2(-1, s1), cbar = comp2(-1, -s1);
                        auto src = [&](double tau) { return P.diag(cbar, ip, is + s1 * it, -s1, tau); };
                        cplx v = data(c, pval, s + s1 * t);
                        if (omega != 0.0)
                            v += mi * integrate_lattice(src, 0.0, t, 0.0, h);
                        next[L.index(c, ip, it, is)] = v;
                    }
                    // Photon moving left, photon foot r = pval.
                    const double s_rel = s - pval;
                    if (s_rel < -t - 1e-9 * h) {
                        next[L.index(2, ip, it, is)] = 0.0;
                        next[L.index(3, ip, it, is)] = 0.0;
                        continue;
                    }
                    {
                        auto src = [&](double tau) { return P.diag(2, ip, is + it, -1, tau); };
                        cplx v = data(3, pval, s + t);
                        if (omega != 0.0)
                            v += mi * integrate_lattice(src, 0.0, t, 0.0, h);
                        next[L.index(3, ip, it, is)] = v;
                    }
                    {
                        auto src = [&](double tau) { return P.diag(3, ip, is - it, 1, tau); };
                        cplx v;
                        if (s_rel >= t) {
                            v = data(2, pval, s - t);
                            if (omega != 0.0)
                                v += mi * integrate_lattice(src, 0.0, t, 0.0, h);
                        } else {
                            // Reflected through the crossing point (T*, r - T*).
                            const double tstar = 0.5 * (pval - s + t);
                            const long ipb = is - it - pshift; // p index of s - t
                            const long is_r = ip + pshift;                  // s index of r
                            auto bsrc = [&](double tau) { return P.diag(0, ipb, is_r, -1, tau); };
                            cplx b = data(1, s - t, pval);
                            if (omega != 0.0)
                                b += mi * integrate_lattice(bsrc, 0.0, tstar, 0.0, h);
                            v = phase * b;
                            if (omega != 0.0)
                                v += mi * integrate_lattice(src, tstar, t, 0.0, h);
                        }
                        next[L.index(2, ip, it, is)] = v;
                    }
                }
            }
        });

        double res = 0.0, wres = 0.0;
        for (long c = 0; c < 4; ++c)
            for (long ip = 0; ip < L.np; ++ip)
                for (long it = 0; it < L.nt; ++it) {
                    const double w = std::exp(-out.gamma * static_cast<double>(it) * h);
                    const std::size_t base = L.index(static_cast<int>(c), ip, it, 0);
                    for (long is = 0; is < L.ns; ++is) {
                        const double d = std::abs(next[base + is] - cur[base + is]);
                        res = std::max(res, d);
                        wres = std::max(wres, w * d);
                    }
                }
        cur.swap(next);
        out.residuals.push_back(res);
        out.weighted_residuals.push_back(wres);
        out.iterations = iter;
        if (res < tol)
            break;
    }
    if (out.residuals.empty() || out.residuals.back() >= tol) {
        std::ostringstream msg;
        msg << "picard_solve: no convergence after " << max_iter << " iterations, last residual "
            << (out.residuals.empty() ? 0.0 : out.residuals.back());
        throw ConvergenceError(msg.str(), out.residuals);
    }
    double ratio = 0.0;
    for (std::size_t k = 1; k < out.weighted_residuals.size(); ++k)
        if (out.weighted_residuals[k - 1] > 1e-14)
            ratio = std::max(ratio, out.weighted_residuals[k] / out.weighted_residuals[k - 1]);
    out.measured_ratio = ratio;
    out.values = std::move(cur);
    return out;
}

} // namespace mtqm
