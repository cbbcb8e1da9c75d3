#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mtqm/csv.hpp"
#include "mtqm/parallel.hpp"
#include "mtqm/runner.hpp"

using namespace mtqm;
namespace fs = std::filesystem;

namespace {

const char* minimal = R"(
[scenario]
mode = three_body_equal_time

[photon]
center = 0
width = 0.03

[electron1]
center = -0.45
width = 0.04

[electron2]
center = 0.45
width = 0.04

[component --+]
amplitude = 1
)";

Scenario parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_scenario(in);
}

std::vector<std::string> problems_of(const std::string& text)
{
    try {
        parse(text);
    } catch (const ScenarioError& e) {
        return e.problems;
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& what)
{
    for (const auto& p : problems)
        if (p.find(what) != std::string::npos)
            return true;
    return false;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("mtqm_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string with(const std::string& section, const std::string& body)
{
    return std::string(minimal) + "\n[" + section + "]\n" + body + "\n";
}

} // namespace

TEST_CASE("minimal scenario resolves the documented defaults")
{
    const auto s = parse(minimal);
    CHECK(s.mode == Mode::ThreeBodyEqualTime);
    CHECK(s.support_gap == 0.1);
    CHECK(s.spacing == 1.0 / 128.0);
    CHECK(s.quadrature_spacing == 1.0 / 128.0);
    CHECK(s.epsilon_ladder == std::vector<double>{0.4, 0.2, 0.1, 0.05});
    REQUIRE(s.components.size() == 1);
    CHECK(s.components[0].signs == "--+");
    CHECK(s.components[0].amplitude == cplx(1.0, 0.0));
    CHECK(s.components[0].shapes[1].center == -0.45);
    CHECK(s.params.electron_mass == 1.0);
}

TEST_CASE("scenario validation names the offending fields")
{
    auto p = problems_of(with("numerics", "spacing = -0.01"));
    REQUIRE(p.size() == 1);
    CHECK(mentions(p, "numerics.spacing"));

    p = problems_of(with("numerics", "spacing = -0.01\nepsilon_ladder = 0.1, 0.2\nT = -1"));
    CHECK(mentions(p, "numerics.spacing"));
    CHECK(mentions(p, "numerics.epsilon_ladder"));
    CHECK(mentions(p, "numerics.T"));

    CHECK(mentions(problems_of(with("numerics", "spacing = fine")), "numerics.spacing: expected a number"));
    CHECK(mentions(problems_of(with("numerics", "spacng = 0.1")), "unknown key 'spacng'"));
    CHECK(mentions(problems_of(with("numeric", "spacing = 0.1")), "unknown section [numeric]"));
    CHECK(mentions(problems_of(with("scenario2", "x = 1")), "unknown section"));
    CHECK(mentions(problems_of(with("physics", "electron_mass = -1")), "physics.electron_mass"));
    CHECK(mentions(problems_of(with("component -+", "amplitude = 1")), "expected 3 signs"));
    CHECK(mentions(problems_of(with("outputs", "series_points = 2.5")), "outputs.series_points"));
    CHECK(mentions(problems_of(with("numerics", "T = 0.3\nspacing = 1/64")), "multiple of numerics.spacing"));

    // Electron 2 overlapping the photon.
    CHECK(mentions(problems_of(with("component -+-", "electron2_center = 0.1")), "initial data"));

    // Malformed INI is reported with its line.
    const auto broken = problems_of("[scenario]\nmode = free\n[oops\n");
    REQUIRE(broken.size() == 1);
    CHECK(mentions(broken, ":3:"));
}

TEST_CASE("scenarios round-trip through save and load")
{
    auto s = parse(with("numerics", "epsilon_ladder = 0.4, 0.2, 0.1\nspacing = 1/64\nT = 0.5"));
    s.components[0].amplitude = {0.1 + 0.2, -1.0 / 3.0};
    std::ostringstream first;
    save_scenario(s, first);
    const auto back = parse(first.str());
    CHECK(back.epsilon_ladder == std::vector<double>{0.4, 0.2, 0.1});
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::memcmp(&back.epsilon_ladder[i], &s.epsilon_ladder[i], sizeof(double)) == 0);
    CHECK(back.components[0].amplitude == s.components[0].amplitude);
    CHECK(back.spacing == 1.0 / 64.0);
    std::ostringstream second;
    save_scenario(back, second);
    CHECK(first.str() == second.str());
    CHECK(scenario_hash(s) == scenario_hash(back));
    s.T = 0.25;
    CHECK(scenario_hash(s) != scenario_hash(back));
}

TEST_CASE("CSV values read back exactly")
{
    const auto dir = scratch("csv");
    fs::create_directories(dir);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> values{0.0, -0.0, 1e-320, 5e-324, 1.7976931348623157e308, 0.1, 1.0 / 3.0};
    for (int i = 0; i < 200; ++i)
        values.push_back(u(rng) * std::pow(10.0, 20.0 * u(rng)));
    {
        CsvWriter w((dir / "v.csv").string(), {"x", "label"});
        for (double v : values)
            w.row({format_double(v), "-+"});
    }
    const auto t = read_csv((dir / "v.csv").string());
    REQUIRE(t.rows.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = t.number(i, "x");
        CHECK(std::memcmp(&x, &values[i], sizeof x) == 0);
    }
    CHECK(t.rows[3][t.column("label")] == "-+");
    CHECK_THROWS(t.column("y"));

    std::ofstream(dir / "ragged.csv") << "a,b\n1,2\n3\n";
    CHECK_THROWS_AS(read_csv((dir / "ragged.csv").string()), std::runtime_error);
}

TEST_CASE("free mode at T = 0 writes the sampled initial data")
{
    auto s = parse(R"(
[scenario]
mode = free
[numerics]
spacing = 1/64
T = 0
[grid]
e_lo = -2
e_hi = 2
[electron]
center = 0.2
width = 0.3
momentum = 1.5
[component +]
amplitude = 0.5
amplitude_im = 0.25
)");
    const auto dir = scratch("free");
    std::ostringstream log;
    const auto rec = run_scenario(s, {dir.string()}, log);
    REQUIRE(rec.complete);
    const auto t = read_csv((dir / "snapshot.csv").string());
    CHECK(t.header == std::vector<std::string>{"s", "component", "re", "im"});
    const Gaussian g{0.2, 0.3, 1.5};
    double worst = 0.0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double x = t.number(r, "s");
        const cplx expected = t.rows[r][1] == "+" ? cplx(0.5, 0.25) * g(x) : 0.0;
        worst = std::max(worst, std::abs(cplx(t.number(r, "re"), t.number(r, "im")) - expected));
    }
    CHECK(worst == 0.0);
    CHECK(t.rows.size() == 2 * 257);
}

TEST_CASE("manifest lists the emitted files and marks failed runs")
{
    auto s = parse(with("numerics", "spacing = 1/32\nT = 0.125\nepsilon = 0.2"));
    s.ph_lo = -0.5;
    s.ph_hi = 0.6;
    s.e_lo = -0.8;
    s.e_hi = 0.9;
    const auto dir = scratch("manifest");
    std::ostringstream log;
    auto rec = run_scenario(s, {dir.string()}, log);
    REQUIRE(rec.complete);
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["complete"] == true);
    CHECK(m["scenario_hash"] == scenario_hash(s));
    for (const auto& f : m["files"])
        CHECK(fs::exists(dir / f.get<std::string>()));
    CHECK(m["norms"].size() == 5);
    for (const auto& n : m["norms"])
        CHECK(n.get<double>() >= 0.0);

    const auto series = read_csv((dir / "series.csv").string());
    CHECK(series.header == std::vector<std::string>{"t", "norm", "integrated_flux"});
    const auto snap = read_csv((dir / "snapshot.csv").string());
    CHECK(snap.header == std::vector<std::string>{"s_ph", "s_e1", "s_e2", "component", "re", "im"});

    // The leg to the smallest particle time must land on the lattice.
    s.mode = Mode::ThreeBodyMultitime;
    s.t_ph = 0.1;
    s.t_e1 = 0.1;
    s.t_e2 = 0.1;
    const auto bad = scratch("manifest_bad");
    rec = run_scenario(s, {bad.string()}, log);
    CHECK_FALSE(rec.complete);
    CHECK(rec.error.find("multiple") != std::string::npos);
    CHECK(nlohmann::json::parse(slurp(bad / "manifest.json"))["complete"] == false);
}

TEST_CASE("outputs are bit-identical across thread counts")
{
    auto s = parse(with("numerics", "spacing = 1/32\nT = 0.375\nepsilon = 0.2"));
    s.ph_lo = -0.5;
    s.ph_hi = 0.6;
    s.e_lo = -0.8;
    s.e_hi = 0.9;
    s.output_stride = 1;
    std::vector<fs::path> dirs;
    for (int threads : {1, 3, 0}) {
        set_thread_count(threads);
        dirs.push_back(scratch("threads" + std::to_string(threads)));
        std::ostringstream log;
        REQUIRE(run_scenario(s, {dirs.back().string()}, log).complete);
    }
    set_thread_count(0);
    for (const char* name : {"snapshot.csv", "series.csv", "scenario.ini"}) {
        const auto ref = slurp(dirs[0] / name);
        CHECK(ref.size() > 0);
        CHECK(slurp(dirs[1] / name) == ref);
        CHECK(slurp(dirs[2] / name) == ref);
    }
}
