#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mtqm/scenario.hpp"

namespace mtqm {

struct CheckLine {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct RunRecord {
    std::string scenario_hash;
    std::string mode;
    std::vector<double> times;
    std::vector<double> norms;
    double flux_total = 0.0; // time-integrated wall flux, three-body equal-time runs
    double seconds = 0.0;
    std::vector<std::string> files; // relative to the output directory
    std::vector<CheckLine> checks;
    bool complete = false;
    std::string error;

    bool all_pass() const;
};

struct RunOptions {
    std::string out_dir;     // overrides the scenario's outputs.directory when set
    unsigned seed = 20240611; // random property checks in verify mode
};

/// Dispatches on s.mode, writes the CSV outputs and manifest.json. Numerical failures are
/// caught: the record is returned with complete = false and the message in `error`.
RunRecord run_scenario(const Scenario& s, const RunOptions& options, std::ostream& log);

} // namespace mtqm
