#pragma once

#include <array>
#include <functional>
#include <vector>

#include "mtqm/core.hpp"
#include "mtqm/two_body.hpp"

namespace mtqm {

struct ThreeBodyConfig {
    SpacetimePoint ph;
    SpacetimePoint e1;
    SpacetimePoint e2;
};

/// Component index 4*b0 + 2*b1 + b2 with bit = 1 for '+' (photon, electron 1, electron 2).
inline constexpr int comp3(int s0, int s1, int s2) { return 4 * sign_bit(s0) + 2 * sign_bit(s1) + sign_bit(s2); }

using ThreeBodyValues = std::array<cplx, 8>;

enum class RegionLabel { Free, Compton1, Compton2, Compton3, Coulomb };

const char* region_name(RegionLabel r);

/// Throws DomainError unless s_e1 < s_ph < s_e2 and the photon is spacelike to both electrons.
void require_three_body_s1(const ThreeBodyConfig& c);

/// Coulomb means the electrons' backward cones cross: s_e2 - t_e2 < s_e1 + t_e1.
RegionLabel classify_three_body(const ThreeBodyConfig& c);

class ThreeBodyInitialData {
public:
    using Fn = std::function<cplx(int comp, double s_ph, double s_e1, double s_e2)>;

    struct Term {
        int comp = 0;
        cplx amplitude{1.0, 0.0};
        Gaussian photon;
        Gaussian e1;
        Gaussian e2;
    };

    ThreeBodyInitialData() = default;
    /// Values outside the open wedge s_e1 < s_ph < s_e2 are discarded.
    ThreeBodyInitialData(Fn f, double support_gap);

    /// Sum of product Gaussians, checked like the two-body version against both walls.
    static ThreeBodyInitialData gaussians(std::vector<Term> terms, double support_gap, double tail_tolerance = 1e-9);

    cplx operator()(int comp, double s_ph, double s_e1, double s_e2) const
    {
        if (!(s_e1 < s_ph && s_ph < s_e2))
            return cplx(0.0);
        return f_(comp, s_ph, s_e1, s_e2);
    }

    double support_gap() const { return gap_; }
    const std::vector<Term>& terms() const { return terms_; }

private:
    Fn f_;
    double gap_ = 0.1;
    std::vector<Term> terms_;
};

/// Free evolution P(x_ph) (x) E(x_e1) (x) E(x_e2) of the data. Valid on Free configurations.
ThreeBodyValues evolve_free_3(const ThreeBodyInitialData& data, const PhysicalParams& params,
                              const ThreeBodyConfig& c, double quadrature_spacing = 1.0 / 128.0);

/// Compton evolution; `which_case` must match classify_three_body.
ThreeBodyValues evolve_compton(const ThreeBodyInitialData& data, const PhysicalParams& params,
                               const ThreeBodyConfig& c, int which_case, double quadrature_spacing = 1.0 / 128.0);

/// Dispatches on the region; Coulomb configurations raise ContractViolation.
ThreeBodyValues evolve_exact(const ThreeBodyInitialData& data, const PhysicalParams& params,
                             const ThreeBodyConfig& c, double quadrature_spacing = 1.0 / 128.0);

/// Smooth cutoff: 0 on [0, eps], 1 on [2 eps, inf), quintic smoothstep between.
class TransitionFunction {
public:
    explicit TransitionFunction(double epsilon);

    double epsilon() const { return eps_; }
    double operator()(double d) const;

private:
    double eps_;
};

double mu_eval(const TransitionFunction& mu, double d);

/// N = ceil(1 + 2T/eps).
long truncation_count(double T, double epsilon);

/// Equal-time nodes (i, j, k) * h with j <= i <= k: photon index i in [ph_lo, ph_hi],
/// electron-1 index j >= e1_lo and electron-2 index k <= e2_hi.
class WedgeGrid {
public:
    WedgeGrid() = default;
    WedgeGrid(double spacing, long ph_lo, long ph_hi, long e1_lo, long e2_hi);

    /// Smallest lattice box containing the given position ranges.
    static WedgeGrid covering(double spacing, double ph_lo, double ph_hi, double e1_lo, double e2_hi);

    double spacing() const { return h_; }
    long ph_lo() const { return i0_; }
    long ph_hi() const { return i1_; }
    long e1_lo() const { return j0_; }
    long e2_hi() const { return k1_; }
    std::size_t size() const { return size_; }

    bool contains(long i, long j, long k) const
    {
        return i >= i0_ && i <= i1_ && j >= j0_ && j <= i && k >= i && k <= k1_;
    }
    std::size_t index(long i, long j, long k) const
    {
        return offset_[static_cast<std::size_t>(i - i0_)] + static_cast<std::size_t>(j - j0_) * row(i) +
               static_cast<std::size_t>(k - i);
    }
    std::size_t row(long i) const { return static_cast<std::size_t>(k1_ - i + 1); }
    std::size_t begin(long i) const { return offset_[static_cast<std::size_t>(i - i0_)]; }

    /// Trapezoid weight: 1/2 for each wall the node lies on.
    double weight(long i, long j, long k) const { return (j == i ? 0.5 : 1.0) * (k == i ? 0.5 : 1.0); }

    /// Calls f(i, j, k, flat index) for every node, in storage order.
    template <class F>
    void for_each(F&& f) const
    {
        std::size_t n = 0;
        for (long i = i0_; i <= i1_; ++i)
            for (long j = j0_; j <= i; ++j)
                for (long k = i; k <= k1_; ++k)
                    f(i, j, k, n++);
    }

    bool operator==(const WedgeGrid& o) const
    {
        return h_ == o.h_ && i0_ == o.i0_ && i1_ == o.i1_ && j0_ == o.j0_ && k1_ == o.k1_;
    }

private:
    double h_ = 1.0;
    long i0_ = 0, i1_ = 0, j0_ = 0, k1_ = 0;
    std::vector<std::size_t> offset_;
    std::size_t size_ = 0;
};

/// Equal-time three-body field, eight components per wedge node.
struct ThreeBodyField {
    WedgeGrid grid;
    double t = 0.0;
    std::vector<cplx> values; // [node][comp]

    ThreeBodyField() = default;
    ThreeBodyField(WedgeGrid g, double time) : grid(std::move(g)), t(time), values(8 * grid.size(), cplx(0.0)) {}

    cplx& at(int comp, long i, long j, long k) { return values[8 * grid.index(i, j, k) + comp]; }
    cplx at(int comp, long i, long j, long k) const { return values[8 * grid.index(i, j, k) + comp]; }
    ThreeBodyValues node(std::size_t n) const;

    /// Zero outside the grid.
    cplx get(int comp, long i, long j, long k) const
    {
        return grid.contains(i, j, k) ? values[8 * grid.index(i, j, k) + comp] : cplx(0.0);
    }
};

ThreeBodyField sample_three_body(const ThreeBodyInitialData& data, const WedgeGrid& grid);

/// Squared L2 norm over the wedge (trapezoid, halved on the walls).
double norm_squared(const ThreeBodyField& f);

/// L2 distance between two fields on the same grid.
double l2_distance(const ThreeBodyField& a, const ThreeBodyField& b);

/// Tricubic interpolation in (photon, wall-gap, wall-gap) coordinates with one-sided stencils at the walls.
ThreeBodyValues interpolate(const ThreeBodyField& f, double s_ph, double s_e1, double s_e2);

/// (x, y, z) -> (-x, -z, -y) with all signs flipped. Requires a mirror-symmetric grid.
ThreeBodyField parity_exchange(const ThreeBodyField& f);

/// One leaky step of length dt (a multiple of the grid spacing, at most eps/2): half mass
/// rotation, characteristic transport with mu * e^{i theta} reflections, half mass rotation.
/// `trace`, if given, receives the field before the final half rotation; it satisfies the
/// leaky boundary conditions exactly on the walls.
ThreeBodyField leaky_step(const ThreeBodyField& state, const PhysicalParams& params, const TransitionFunction& mu,
                          double dt, ThreeBodyField* trace = nullptr);

/// exp(-i angle sigma_x) on both electron indices: the mass term acting for time angle / omega.
ThreeBodyValues mass_rotation(const ThreeBodyValues& v, double angle);

/// Undoes the final half rotation of a step: the boundary trace of a field produced with step dt.
ThreeBodyField boundary_trace(const ThreeBodyField& state, const PhysicalParams& params, double dt);

struct LeakyRun {
    ThreeBodyField final_state;
    double step = 0.0;
    std::vector<double> times;
    std::vector<double> norms; // L2 norm (not squared) after each step, starting at t = 0
};

/// Called at t = 0 and after every step with the state and its boundary trace.
using LeakyObserver = std::function<void(double t, const ThreeBodyField& state, const ThreeBodyField& trace)>;

/// Default step: the largest multiple of the spacing not exceeding eps/2. The final step is
/// shortened to land on T, which must be a multiple of the spacing.
LeakyRun leaky_evolve(const ThreeBodyField& initial, const PhysicalParams& params, const TransitionFunction& mu,
                      double T, double step = 0.0, const LeakyObserver& observer = {});

struct ConvergenceRow {
    double epsilon = 0.0;
    double norm = 0.0;
    double gap_to_next = 0.0; // ||Psi_eps(T) - Psi_{next eps}(T)||, 0 for the last row
    double leaked = 0.0;      // ||Psi(0)||^2 - ||Psi_eps(T)||^2
    double step = 0.0;
};

/// Runs every eps on the ladder with one common step (fitting the smallest eps).
std::vector<ConvergenceRow> convergence_study(const ThreeBodyField& initial, const PhysicalParams& params, double T,
                                              const std::vector<double>& ladder);

/// Equal-time leg to t = min time, then one more exact leg to the configuration.
struct MultiTimeOptions {
    enum class Leg { Leaky, Exact };
    Leg leg = Leg::Leaky;
    double epsilon = 0.05;
    WedgeGrid grid;                      // equal-time grid for the leaky leg
    double quadrature_spacing = 1.0 / 128.0;
};

ThreeBodyValues multitime_eval(const ThreeBodyInitialData& data, const PhysicalParams& params,
                               const ThreeBodyConfig& c, const MultiTimeOptions& options);

/// The field as initial data (tricubic interpolation), used for the second leg.
ThreeBodyInitialData as_initial_data(const ThreeBodyField& f);

} // namespace mtqm
