#include "mtqm/scenario.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace mtqm {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, Mode> mode_names{
    {"free", Mode::Free},
    {"two_body", Mode::TwoBody},
    {"three_body_equal_time", Mode::ThreeBodyEqualTime},
    {"three_body_multitime", Mode::ThreeBodyMultitime},
    {"convergence", Mode::Convergence},
    {"verify", Mode::Verify},
};

const std::string component_prefix = "component ";

// Shortest form that reads back to the same double.
std::string fmt(double x)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// Accepts plain decimals and p/q fractions such as 1/128.
bool parse_number(const std::string& text, double& out)
{
    const std::string t = trim(text);
    if (t.empty())
        return false;
    const auto slash = t.find('/');
    if (slash != std::string::npos) {
        double p, q;
        if (!parse_number(t.substr(0, slash), p) || !parse_number(t.substr(slash + 1), q) || q == 0.0)
            return false;
        out = p / q;
        return true;
    }
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

// Reads one section, recording unknown keys and malformed values.
class SectionReader {
public:
    SectionReader(const pt::ptree* node, std::string section, std::vector<std::string>& problems)
        : node_(node), section_(std::move(section)), problems_(problems)
    {
    }

    void number(const std::string& key, double& target)
    {
        seen_.insert(key);
        if (auto v = raw(key); !v.empty() && !parse_number(v, target))
            problem(key, "expected a number, got '" + v + "'");
    }

    void integer(const std::string& key, int& target)
    {
        double x = target;
        number(key, x);
        if (x != std::floor(x) || std::abs(x) > 1e9)
            problem(key, "expected an integer");
        else
            target = static_cast<int>(x);
    }

    void text(const std::string& key, std::string& target)
    {
        seen_.insert(key);
        if (node_ && node_->count(key))
            target = trim(node_->get<std::string>(pt::ptree::path_type(key, '\0')));
    }

    void flag(const std::string& key, bool& target)
    {
        seen_.insert(key);
        const std::string v = raw(key);
        if (v.empty())
            return;
        if (v == "true" || v == "yes" || v == "1")
            target = true;
        else if (v == "false" || v == "no" || v == "0")
            target = false;
        else
            problem(key, "expected true or false, got '" + v + "'");
    }

    void list(const std::string& key, std::vector<double>& target)
    {
        seen_.insert(key);
        const std::string v = raw(key);
        if (v.empty())
            return;
        std::vector<double> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            double x;
            if (!parse_number(item, x)) {
                problem(key, "expected a comma-separated list of numbers, got '" + v + "'");
                return;
            }
            out.push_back(x);
        }
        target = out;
    }

    void finish()
    {
        if (!node_)
            return;
        for (const auto& [key, value] : *node_)
            if (!seen_.count(key))
                problems_.push_back("[" + section_ + "] unknown key '" + key + "'");
    }

private:
    std::string raw(const std::string& key) const
    {
        if (!node_ || !node_->count(key))
            return "";
        return trim(node_->get<std::string>(pt::ptree::path_type(key, '\0')));
    }

    void problem(const std::string& key, const std::string& what)
    {
        problems_.push_back(section_ + "." + key + ": " + what);
    }

    const pt::ptree* node_;
    std::string section_;
    std::vector<std::string>& problems_;
    std::set<std::string> seen_;
};

const pt::ptree* child(const pt::ptree& tree, const std::string& name)
{
    auto it = tree.find(name);
    return it == tree.not_found() ? nullptr : &it->second;
}

void read_gaussian(SectionReader& r, const std::string& prefix, Gaussian& g)
{
    r.number(prefix + "center", g.center);
    r.number(prefix + "width", g.width);
    r.number(prefix + "momentum", g.momentum);
}

} // namespace

const char* mode_name(Mode m)
{
    for (const auto& [name, mode] : mode_names)
        if (mode == m)
            return name.c_str();
    return "?";
}

std::vector<std::string> particles_for(Mode m)
{
    switch (m) {
    case Mode::Free:
        return {"electron"};
    case Mode::TwoBody:
        return {"photon", "electron"};
    default:
        return {"photon", "electron1", "electron2"};
    }
}

ScenarioError::ScenarioError(std::vector<std::string> list)
    : std::runtime_error([&] {
          std::string msg = "invalid scenario:";
          for (const auto& p : list)
              msg += "\n  " + p;
          return msg;
      }()),
      problems(std::move(list))
{
}

Scenario parse_scenario(std::istream& in, const std::string& source)
{
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ScenarioError({source + ":" + std::to_string(e.line()) + ": " + e.message()});
    }

    Scenario s;
    std::vector<std::string> problems;
    std::set<std::string> known{"scenario", "physics", "numerics", "grid", "multitime", "outputs"};

    SectionReader head(child(tree, "scenario"), "scenario", problems);
    std::string mode = mode_name(s.mode);
    head.text("name", s.name);
    head.text("mode", mode);
    head.finish();
    if (auto it = mode_names.find(mode); it != mode_names.end())
        s.mode = it->second;
    else
        problems.push_back("scenario.mode: unknown mode '" + mode + "'");

    double mass = s.params.electron_mass, th1 = s.params.theta1, th2 = s.params.theta2;
    SectionReader phys(child(tree, "physics"), "physics", problems);
    phys.number("electron_mass", mass);
    phys.number("theta1", th1);
    phys.number("theta2", th2);
    phys.finish();
    try {
        s.params = PhysicalParams::make(mass, th1, th2);
    } catch (const DomainError& e) {
        problems.push_back(std::string("physics.electron_mass: ") + e.what());
    }

    SectionReader num(child(tree, "numerics"), "numerics", problems);
    num.number("spacing", s.spacing);
    num.number("support_gap", s.support_gap);
    num.number("T", s.T);
    num.number("epsilon", s.epsilon);
    num.number("step", s.step);
    num.number("quadrature_spacing", s.quadrature_spacing);
    num.list("epsilon_ladder", s.epsilon_ladder);
    num.finish();

    SectionReader grid(child(tree, "grid"), "grid", problems);
    grid.number("ph_lo", s.ph_lo);
    grid.number("ph_hi", s.ph_hi);
    grid.number("e_lo", s.e_lo);
    grid.number("e_hi", s.e_hi);
    grid.finish();

    SectionReader mt(child(tree, "multitime"), "multitime", problems);
    mt.number("t_ph", s.t_ph);
    mt.number("t_e1", s.t_e1);
    mt.number("t_e2", s.t_e2);
    mt.finish();

    SectionReader outs(child(tree, "outputs"), "outputs", problems);
    outs.text("directory", s.directory);
    outs.integer("series_points", s.series_points);
    outs.integer("output_stride", s.output_stride);
    outs.flag("snapshot", s.snapshot);
    outs.finish();

    const auto particles = particles_for(s.mode);
    std::vector<Gaussian> shapes(particles.size());
    for (std::size_t p = 0; p < particles.size(); ++p) {
        known.insert(particles[p]);
        SectionReader r(child(tree, particles[p]), particles[p], problems);
        read_gaussian(r, "", shapes[p]);
        r.finish();
    }

    for (const auto& [section, body] : tree) {
        if (section.rfind(component_prefix, 0) != 0) {
            if (!known.count(section))
                problems.push_back("unknown section [" + section + "]");
            continue;
        }
        ComponentSpec c;
        c.signs = trim(section.substr(component_prefix.size()));
        c.shapes = shapes;
        SectionReader r(&body, section, problems);
        double re = 1.0, im = 0.0;
        r.number("amplitude", re);
        r.number("amplitude_im", im);
        c.amplitude = {re, im};
        for (std::size_t p = 0; p < particles.size(); ++p)
            read_gaussian(r, particles[p] + "_", c.shapes[p]);
        r.finish();
        s.components.push_back(c);
    }

    if (problems.empty())
        problems = validate(s);
    if (!problems.empty())
        throw ScenarioError(problems);
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError({path + ": cannot open file"});
    return parse_scenario(in, path);
}

void save_scenario(const Scenario& s, std::ostream& out)
{
    out << "[scenario]\nname = " << s.name << "\nmode = " << mode_name(s.mode) << "\n\n";
    out << "[physics]\nelectron_mass = " << fmt(s.params.electron_mass) << "\ntheta1 = " << fmt(s.params.theta1)
        << "\ntheta2 = " << fmt(s.params.theta2) << "\n\n";
    out << "[numerics]\nspacing = " << fmt(s.spacing) << "\nsupport_gap = " << fmt(s.support_gap)
        << "\nT = " << fmt(s.T) << "\nepsilon = " << fmt(s.epsilon) << "\nstep = " << fmt(s.step)
        << "\nquadrature_spacing = " << fmt(s.quadrature_spacing) << "\nepsilon_ladder = ";
    for (std::size_t i = 0; i < s.epsilon_ladder.size(); ++i)
        out << (i ? ", " : "") << fmt(s.epsilon_ladder[i]);
    out << "\n\n[grid]\nph_lo = " << fmt(s.ph_lo) << "\nph_hi = " << fmt(s.ph_hi) << "\ne_lo = " << fmt(s.e_lo)
        << "\ne_hi = " << fmt(s.e_hi) << "\n\n";
    out << "[multitime]\nt_ph = " << fmt(s.t_ph) << "\nt_e1 = " << fmt(s.t_e1) << "\nt_e2 = " << fmt(s.t_e2)
        << "\n\n";
    out << "[outputs]\ndirectory = " << s.directory << "\nseries_points = " << s.series_points
        << "\noutput_stride = " << s.output_stride << "\nsnapshot = " << (s.snapshot ? "true" : "false") << "\n";

    // Shapes are written per component so that the particle sections are not needed on reload.
    const auto particles = particles_for(s.mode);
    for (const auto& c : s.components) {
        out << "\n[" << component_prefix << c.signs << "]\namplitude = " << fmt(c.amplitude.real())
            << "\namplitude_im = " << fmt(c.amplitude.imag()) << "\n";
        for (std::size_t p = 0; p < particles.size() && p < c.shapes.size(); ++p)
            out << particles[p] << "_center = " << fmt(c.shapes[p].center) << "\n"
                << particles[p] << "_width = " << fmt(c.shapes[p].width) << "\n"
                << particles[p] << "_momentum = " << fmt(c.shapes[p].momentum) << "\n";
    }
}

std::vector<std::string> validate(const Scenario& s)
{
    std::vector<std::string> p;
    auto positive = [&](const char* name, double v) {
        if (!(v > 0.0))
            p.push_back(std::string(name) + ": must be positive, got " + fmt(v));
    };
    positive("numerics.spacing", s.spacing);
    positive("numerics.quadrature_spacing", s.quadrature_spacing);
    positive("numerics.epsilon", s.epsilon);
    if (!(s.support_gap >= 0.0))
        p.push_back("numerics.support_gap: must be non-negative, got " + fmt(s.support_gap));
    if (!(s.T >= 0.0))
        p.push_back("numerics.T: must be non-negative, got " + fmt(s.T));
    if (!(s.step >= 0.0))
        p.push_back("numerics.step: must be non-negative, got " + fmt(s.step));
    if (s.epsilon_ladder.empty())
        p.push_back("numerics.epsilon_ladder: must not be empty");
    for (std::size_t i = 0; i < s.epsilon_ladder.size(); ++i) {
        if (!(s.epsilon_ladder[i] > 0.0))
            p.push_back("numerics.epsilon_ladder: entries must be positive");
        if (i > 0 && !(s.epsilon_ladder[i] < s.epsilon_ladder[i - 1]))
            p.push_back("numerics.epsilon_ladder: must be strictly decreasing");
    }
    if (!(s.ph_lo < s.ph_hi))
        p.push_back("grid.ph_lo: must be below grid.ph_hi");
    if (!(s.e_lo < s.e_hi))
        p.push_back("grid.e_lo: must be below grid.e_hi");
    if (s.series_points < 1)
        p.push_back("outputs.series_points: must be at least 1");
    if (s.output_stride < 1)
        p.push_back("outputs.output_stride: must be at least 1");
    if (s.mode == Mode::ThreeBodyMultitime && !(std::min({s.t_ph, s.t_e1, s.t_e2}) >= 0.0))
        p.push_back("multitime: particle times must be non-negative");

    const bool three = particles_for(s.mode).size() == 3;
    if (three && s.spacing > 0.0) {
        const double n = s.T / s.spacing;
        if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
            p.push_back("numerics.T: must be a multiple of numerics.spacing for the three-body modes");
    }

    const std::size_t np = particles_for(s.mode).size();
    std::set<std::string> seen;
    if (s.components.empty())
        p.push_back("initial data: no [component ...] sections");
    for (const auto& c : s.components) {
        const std::string where = "[" + component_prefix + c.signs + "]";
        bool ok = c.signs.size() == np;
        for (char ch : c.signs)
            ok = ok && (ch == '+' || ch == '-');
        if (!ok)
            p.push_back(where + ": expected " + std::to_string(np) + " signs of '+' or '-'");
        if (!seen.insert(c.signs).second)
            p.push_back(where + ": duplicate component");
        for (std::size_t k = 0; k < c.shapes.size(); ++k)
            if (!(c.shapes[k].width > 0.0))
                p.push_back(where + ": " + particles_for(s.mode)[k] + " width must be positive");
    }
    if (!p.empty())
        return p;

    // Support of the data against the walls.
    try {
        if (s.mode == Mode::TwoBody)
            two_body_data(s);
        else if (three)
            three_body_data(s);
    } catch (const DomainError& e) {
        p.push_back(std::string("initial data: ") + e.what());
    }
    return p;
}

std::string scenario_hash(const Scenario& s)
{
    std::ostringstream os;
    save_scenario(s, os);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : os.str()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

namespace {

int component_index(const std::string& signs)
{
    int c = 0;
    for (char ch : signs)
        c = 2 * c + (ch == '+' ? 1 : 0);
    return c;
}

} // namespace

ElectronSpinor one_body_data(const Scenario& s)
{
    const Grid1D grid = Grid1D::covering(s.e_lo, s.e_hi, s.spacing);
    std::vector<cplx> v[2] = {std::vector<cplx>(grid.count()), std::vector<cplx>(grid.count())};
    for (const auto& c : s.components) {
        const int comp = component_index(c.signs);
        for (std::size_t i = 0; i < grid.count(); ++i)
            v[comp][i] += c.amplitude * c.shapes[0](grid.point(i));
    }
    return ElectronSpinor(SampledField1D(grid, v[0]), SampledField1D(grid, v[1]));
}

TwoBodyInitialData two_body_data(const Scenario& s)
{
    std::vector<TwoBodyInitialData::Term> terms;
    for (const auto& c : s.components)
        terms.push_back({component_index(c.signs), c.amplitude, c.shapes[0], c.shapes[1]});
    return TwoBodyInitialData::gaussians(terms, s.support_gap);
}

ThreeBodyInitialData three_body_data(const Scenario& s)
{
    std::vector<ThreeBodyInitialData::Term> terms;
    for (const auto& c : s.components)
        terms.push_back({component_index(c.signs), c.amplitude, c.shapes[0], c.shapes[1], c.shapes[2]});
    return ThreeBodyInitialData::gaussians(terms, s.support_gap);
}

} // namespace mtqm
