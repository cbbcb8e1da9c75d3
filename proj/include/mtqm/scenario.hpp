#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtqm/free.hpp"
#include "mtqm/three_body.hpp"

namespace mtqm {

enum class Mode { Free, TwoBody, ThreeBodyEqualTime, ThreeBodyMultitime, Convergence, Verify };

const char* mode_name(Mode m);

/// Particle names used as section names, in component-index order.
std::vector<std::string> particles_for(Mode m);

/// One component of the initial data: a product of Gaussians times an amplitude.
struct ComponentSpec {
    std::string signs;            // one '+' or '-' per particle, e.g. "-+-"
    cplx amplitude{1.0, 0.0};
    std::vector<Gaussian> shapes; // one per particle
};

struct Scenario {
    std::string name = "scenario";
    Mode mode = Mode::ThreeBodyEqualTime;
    PhysicalParams params;
    std::vector<ComponentSpec> components;

    // [numerics]
    double spacing = 1.0 / 128.0;
    double support_gap = 0.1;
    double T = 1.0;
    double epsilon = 0.1;
    double step = 0.0; // leaky step; 0 means one grid spacing
    double quadrature_spacing = 1.0 / 128.0;
    std::vector<double> epsilon_ladder{0.4, 0.2, 0.1, 0.05};

    // [grid]: photon range and electron ranges (electron1 low end, electron2 high end). The
    // one- and two-body modes use lo/hi of the single electron.
    double ph_lo = -1.0, ph_hi = 1.0;
    double e_lo = -2.0, e_hi = 2.0;

    // [multitime] particle times of the output configurations
    double t_ph = 1.0, t_e1 = 1.0, t_e2 = 1.0;

    // [outputs]
    std::string directory = "out";
    int series_points = 10;   // time samples in the series for the one- and two-body modes
    int output_stride = 4;    // three-body snapshots: every stride-th grid point per axis
    bool snapshot = true;
};

/// Parse or validation failure; `problems` lists every issue found.
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(std::vector<std::string> list);
    std::vector<std::string> problems;
};

Scenario parse_scenario(std::istream& in, const std::string& source = "<input>");
Scenario load_scenario(const std::string& path);

/// Writes every field, defaults included, in a form that loads back to identical doubles.
void save_scenario(const Scenario& s, std::ostream& out);

/// Empty when valid. Checks the numeric invariants and the support of the initial data.
std::vector<std::string> validate(const Scenario& s);

/// FNV-1a of the saved form, as 16 hex digits.
std::string scenario_hash(const Scenario& s);

/// The free-mode electron sampled on [e_lo, e_hi].
ElectronSpinor one_body_data(const Scenario& s);
TwoBodyInitialData two_body_data(const Scenario& s);
ThreeBodyInitialData three_body_data(const Scenario& s);

} // namespace mtqm
