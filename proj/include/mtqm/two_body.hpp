#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "mtqm/core.hpp"
#include "mtqm/free.hpp"

namespace mtqm {

struct SpacetimePoint {
    double t = 0.0;
    double s = 0.0;
};

/// Component index for a pair of signs: bit = 1 for '+'. Two-body order is --, -+, +-, ++.
inline constexpr int sign_bit(int sign) { return sign > 0 ? 1 : 0; }
inline constexpr int bit_sign(int bit) { return bit ? 1 : -1; }
inline constexpr int comp2(int s0, int s1) { return 2 * sign_bit(s0) + sign_bit(s1); }

/// exp(-(s - center)^2 / (2 width^2) + i momentum s)
struct Gaussian {
    double center = 0.0;
    double width = 0.1;
    double momentum = 0.0;

    cplx operator()(double s) const;
};

struct TwoBodyConfig {
    SpacetimePoint ph;
    SpacetimePoint e;
};

enum class TwoBodyRegion { Far, Near };

/// Throws DomainError unless the photon is left of the electron and spacelike to it.
void require_two_body_s1(const TwoBodyConfig& c);
TwoBodyRegion classify_two_body(const TwoBodyConfig& c);

using TwoBodyValues = std::array<cplx, 4>;

class TwoBodyInitialData {
public:
    using Fn = std::function<cplx(int comp, double s_ph, double s_e)>;

    struct Term {
        int comp = 0;
        cplx amplitude{1.0, 0.0};
        Gaussian photon;
        Gaussian electron;
    };

    TwoBodyInitialData() = default;
    /// Wraps a component function; values on or left of the diagonal are discarded.
    TwoBodyInitialData(Fn f, double support_gap);

    /// Sum of product Gaussians. Throws if the data exceeds tail_tolerance (relative to its
    /// peak) within support_gap of the diagonal.
    static TwoBodyInitialData gaussians(std::vector<Term> terms, double support_gap, double tail_tolerance = 1e-9);

    cplx operator()(int comp, double s_ph, double s_e) const
    {
        if (!(s_ph < s_e))
            return cplx(0.0);
        return f_(comp, s_ph, s_e);
    }

    double support_gap() const { return gap_; }
    const std::vector<Term>& terms() const { return terms_; }

private:
    Fn f_;
    double gap_ = 0.1;
    std::vector<Term> terms_;
};

/// Photon-electron evolution with the contact condition psi_{+-} = e^{i theta} psi_{-+} on the diagonal.
/// All quadratures use nodes k*h with h = quadrature_spacing.
class ContactSolver {
public:
    ContactSolver(TwoBodyInitialData data, double omega, double theta, double quadrature_spacing = 1.0 / 128.0);

    TwoBodyValues evolve_far(const TwoBodyConfig& c) const;
    TwoBodyValues evaluate(const TwoBodyConfig& c) const;

    /// Evaluates many configurations, sharing the boundary-line data between those with the
    /// same photon foot. Output order matches input order.
    std::vector<TwoBodyValues> evaluate_batch(const std::vector<TwoBodyConfig>& configs) const;

    /// The e^{i theta} boundary-line contribution G^L(t_e, s~) G to psi_{+-} at a Near point.
    cplx left_line_term(const TwoBodyConfig& c) const;

    double omega() const { return omega_; }
    double theta() const { return theta_; }
    double spacing() const { return h_; }
    const TwoBodyInitialData& data() const { return data_; }

    struct Lines;

private:
    TwoBodyValues evaluate_with(const TwoBodyConfig& c, const Lines* lines) const;
    std::shared_ptr<Lines> build_lines(double r, double t_max) const;
    std::array<cplx, 2> far_plus(double r, double t, double s) const;
    cplx near_plus_minus(const Lines& L, double t, double s_rel) const;

    TwoBodyInitialData data_;
    double omega_;
    double theta_;
    double h_;
};

TwoBodyValues evolve_far(const TwoBodyInitialData& data, const PhysicalParams& params, const TwoBodyConfig& c,
                         double quadrature_spacing = 1.0 / 128.0);
TwoBodyValues contact_evolve(const TwoBodyInitialData& data, const PhysicalParams& params, const TwoBodyConfig& c,
                             double quadrature_spacing = 1.0 / 128.0);

/// Four components tabulated on an (s_ph, s_e) grid at fixed particle times; entries with
/// s_ph >= s_e are zero.
struct TwoBodyField {
    double t_ph = 0.0;
    double t_e = 0.0;
    Grid1D grid_ph;
    Grid1D grid_e;
    std::array<std::vector<cplx>, 4> comps;

    cplx at(int comp, std::size_t i, std::size_t j) const { return comps[comp][i * grid_e.count() + j]; }
};

TwoBodyField tabulate_two_body(const ContactSolver& solver, double t_ph, double t_e, const Grid1D& grid_ph,
                               const Grid1D& grid_e);

/// Equal-time probability over s_ph < s_e (trapezoid weights, halved on the diagonal).
double two_body_probability(const TwoBodyField& field);

/// |psi_{+-} - e^{i theta} psi_{-+}| on the diagonal, extrapolated (quadratic) from the samples at
/// photon offsets d, 2d and 3d below it. `field` evaluates a configuration.
double boundary_residual_2body(const std::function<TwoBodyValues(const TwoBodyConfig&)>& field, double t,
                               const std::vector<double>& diagonal_positions, double theta, double d);

/// Same, using the grid's first three off-diagonal rows (requires a shared lattice on both axes).
double boundary_residual_2body(const TwoBodyField& field, double theta);

struct PicardGrid {
    double p_lo = -3.0, p_hi = 3.0; // photon foot range (s_ph - t_ph or s_ph + t_ph)
    double s_lo = -3.0, s_hi = 3.0; // electron position range
    double spacing = 1.0 / 32.0;
    double T = 1.0;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residuals(std::move(history))
    {
    }
    std::vector<double> residuals;
};

/// Fixed-point solution on the photon-foot / electron-time / electron-position lattice.
class PicardField {
public:
    Grid1D grid_p, grid_s;
    std::size_t nt = 0;
    double spacing = 0.0;
    std::vector<double> residuals;          // sup-norm change per iteration
    std::vector<double> weighted_residuals; // same with weight e^{-gamma t}
    double gamma = 0.0;
    double measured_ratio = 0.0; // largest ratio of successive weighted residuals
    int iterations = 0;

    /// Values at a configuration whose feet, electron time and position lie on the lattice.
    TwoBodyValues at(const TwoBodyConfig& c) const;

    std::vector<cplx> values; // [comp][p][t][s]

    cplx get(int comp, long ip, long it, long is) const;
};

PicardField picard_solve(const TwoBodyInitialData& data, const PhysicalParams& params, const PicardGrid& grid,
                         double tol = 1e-10, int max_iter = 60);

} // namespace mtqm
