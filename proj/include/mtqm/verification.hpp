#pragma once

#include <algorithm>
#include <array>
#include <functional>

#include "mtqm/three_body.hpp"

namespace mtqm {

/// Joint current j^{mu nu kappa} for X = d/dt, indexed 4 mu + 2 nu + kappa.
struct CurrentTensor3 {
    std::array<double, 8> j{};

    double operator()(int mu, int nu, int kappa) const { return j[4 * mu + 2 * nu + kappa]; }
};

/// Each component contributes |psi|^2 / 4, with a factor (-1)^mu for a '+' photon index,
/// (-1)^nu and (-1)^kappa likewise for the electrons.
CurrentTensor3 current_multitime(const ThreeBodyValues& psi);

struct EqualTimeCurrent {
    double j0 = 0.0, j1 = 0.0, j2 = 0.0, j3 = 0.0;
};

EqualTimeCurrent current_equal_time(const ThreeBodyValues& psi);

enum class Wall { C1, C2 };

/// Inward probability flux -j.n through a wall, with the 1/sqrt(2) normalization.
double wall_flux(const ThreeBodyValues& psi, Wall wall);

/// The same flux with the leaky condition substituted: (mu^2 - 1)/sqrt(2) times the incoming weight.
double wall_flux_reduced(const ThreeBodyValues& psi, double mu, Wall wall);

struct WallFluxComparison {
    double max_difference = 0.0;
    double max_flux = 0.0;
    std::size_t samples = 0;
};

/// Raw against reduced flux on every wall node of a boundary trace.
WallFluxComparison compare_wall_fluxes(const ThreeBodyField& trace, const TransitionFunction& mu);

/// d/dt ||Psi||^2 carried through both walls by a boundary trace. A wall point (u, v) has
/// surface element sqrt(2) du dv and the electron pair crosses it at relative speed 2.
double wall_loss_rate(const ThreeBodyField& trace);

double l2_norm_wedge(const ThreeBodyField& f);

struct ProbabilityBalance {
    double initial_norm2 = 0.0;
    double final_norm2 = 0.0;
    double integrated_flux = 0.0; // trapezoid in time over the step traces
    WallFluxComparison flux_check;
    std::vector<double> times;           // t = initial time, then after each step
    std::vector<double> norms;           // L2 norm at those times
    std::vector<double> cumulative_flux; // integrated flux up to those times
    ThreeBodyField final_state;

    double change() const { return final_norm2 - initial_norm2; }
};

/// Leaky run with the wall flux integrated alongside. The default step is one grid spacing; longer
/// steps resolve short leak events poorly in time.
ProbabilityBalance probability_balance(const ThreeBodyField& initial, const PhysicalParams& params,
                                       const TransitionFunction& mu, double T, double step = 0.0);

/// Finite-difference divergences of the joint current at one configuration, maximized over the
/// free indices. `field` must be defined on the six-point stencils around c.
struct JointDivergence {
    double photon = 0.0, electron1 = 0.0, electron2 = 0.0;
    double scale = 0.0; // max |j| at c

    double max() const { return std::max({photon, electron1, electron2}); }
};

JointDivergence joint_divergence(const std::function<ThreeBodyValues(const ThreeBodyConfig&)>& field,
                                 const ThreeBodyConfig& c, double h);

// Deficiency elements of the massless Hamiltonian, in relative coordinates
//   s_p = s_ph, s = (s_ph - s_e1)/2, s~ = (s_e2 - s_ph)/2.
using Profile = std::function<cplx(double, double)>;

struct DeficiencyElement {
    /// +1: Ker(i - H*), profiles (g2, g3, g4, g6). -1: Ker(i + H*), profiles (f1, f3, f4, f5).
    int sign = 1;
    std::array<Profile, 4> profiles;
    /// Exponential rate in e^{-rate s}; 1 for a genuine kernel element.
    double rate = 1.0;

    /// Components 0..7 at relative coordinates.
    ThreeBodyValues evaluate(double sp, double s, double st) const;
    /// Components at physical coordinates.
    ThreeBodyValues at(double s_ph, double s_e1, double s_e2) const;
};

/// Max over interior sample points of |(H* -/+ i) Psi| with central differences of spacing h.
double deficiency_residual(const DeficiencyElement& elem, double h);

/// Box for wedge norms of deficiency elements, in relative coordinates, with 10-point Gauss-Legendre
/// panels. The e^{-s} decay makes 9 a safe cutoff in every direction.
struct WedgeQuadrature {
    double sp_lo = -9.0, sp_hi = 9.0;
    double s_max = 9.0;
    double panel = 0.5;
};

/// L2 norm in the relative-coordinate measure ds_p ds ds~.
double deficiency_norm(const DeficiencyElement& elem, const WedgeQuadrature& q = {});

/// L2 distance between two elements.
double deficiency_distance(const DeficiencyElement& a, const DeficiencyElement& b, const WedgeQuadrature& q = {});

struct ContractionResult {
    DeficiencyElement image;
    double input_norm = 0.0;
    double output_norm = 0.0;
};

/// The contraction Ker(i + H*) -> Ker(i - H*) encoding the leaky conditions. epsilon = 0 means mu = 1.
/// On C1 the cutoff is evaluated at s~, on C2 at s.
DeficiencyElement contraction_image(const DeficiencyElement& f, double epsilon, double theta1, double theta2);
ContractionResult contraction_T(const DeficiencyElement& f, double epsilon, double theta1, double theta2,
                                const WedgeQuadrature& q = {});

/// Boost with rapidity a, parity, or time reversal applied to the components at one point.
struct Transformation {
    enum class Kind { Boost, Parity, TimeReversal };
    Kind kind = Kind::Boost;
    double rapidity = 0.0;
};

ThreeBodyValues transform_components(const ThreeBodyValues& psi, const Transformation& tr);

} // namespace mtqm
