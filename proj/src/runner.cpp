#include "mtqm/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include <json.hpp>

#include "mtqm/csv.hpp"
#include "mtqm/parallel.hpp"
#include "mtqm/verification.hpp"

namespace mtqm {

namespace fs = std::filesystem;

bool RunRecord::all_pass() const
{
    for (const auto& c : checks)
        if (!c.pass)
            return false;
    return complete;
}

namespace {

std::string sign_label(int comp, int particles)
{
    std::string s;
    for (int p = particles - 1; p >= 0; --p)
        s += (comp >> p) & 1 ? '+' : '-';
    return s;
}

std::vector<double> series_times(const Scenario& s)
{
    std::vector<double> t{0.0};
    if (s.T > 0.0)
        for (int k = 1; k <= s.series_points; ++k)
            t.push_back(s.T * k / s.series_points);
    return t;
}

WedgeGrid wedge_grid(const Scenario& s) { return WedgeGrid::covering(s.spacing, s.ph_lo, s.ph_hi, s.e_lo, s.e_hi); }

std::size_t steps_for(const Scenario& s) { return static_cast<std::size_t>(std::llround(s.T / s.spacing)); }

class Context {
public:
    Context(const Scenario& s, fs::path dir, RunRecord& rec, std::ostream& log)
        : s(s), dir(std::move(dir)), rec(rec), log(log)
    {
    }

    std::string file(const std::string& name)
    {
        rec.files.push_back(name);
        return (dir / name).string();
    }

    // Nodes whose indices are all multiples of outputs.output_stride. Returns their flat indices.
    std::vector<std::size_t> write_three_body_snapshot(const ThreeBodyField& f, const std::string& name)
    {
        CsvWriter w(file(name), {"s_ph", "s_e1", "s_e2", "component", "re", "im"});
        const double h = f.grid.spacing();
        const long st = s.output_stride;
        std::vector<std::size_t> written;
        f.grid.for_each([&](long i, long j, long k, std::size_t n) {
            if (i % st || j % st || k % st)
                return;
            written.push_back(n);
            for (int c = 0; c < 8; ++c) {
                const cplx v = f.values[8 * n + c];
                w.row({format_double(i * h), format_double(j * h), format_double(k * h), sign_label(c, 3),
                       format_double(v.real()), format_double(v.imag())});
            }
        });
        return written;
    }

    const Scenario& s;
    fs::path dir;
    RunRecord& rec;
    std::ostream& log;
};

void run_free(Context& ctx)
{
    const Scenario& s = ctx.s;
    const auto initial = one_body_data(s);
    CsvWriter series(ctx.file("series.csv"), {"t", "norm"});
    ElectronSpinor last = initial;
    for (double t : series_times(s)) {
        last = t == 0.0 ? initial : dirac_propagate(initial, s.params.omega(), t);
        const double norm = std::sqrt(last.norm_squared());
        series.row(std::vector<double>{t, norm});
        ctx.rec.times.push_back(t);
        ctx.rec.norms.push_back(norm);
        ctx.log << "  t = " << t << "  norm = " << norm << "\n";
    }
    if (s.snapshot) {
        CsvWriter w(ctx.file("snapshot.csv"), {"s", "component", "re", "im"});
        const Grid1D& g = last.grid();
        for (std::size_t i = 0; i < g.count(); ++i)
            for (int c = 0; c < 2; ++c) {
                const cplx v = c ? last.psi_plus[i] : last.psi_minus[i];
                w.row({format_double(g.point(i)), sign_label(c, 1), format_double(v.real()), format_double(v.imag())});
            }
    }
}

void run_two_body(Context& ctx)
{
    const Scenario& s = ctx.s;
    const ContactSolver solver(two_body_data(s), s.params.omega(), s.params.theta1, s.quadrature_spacing);
    const Grid1D gph = Grid1D::covering(s.ph_lo, s.ph_hi, s.spacing), ge = Grid1D::covering(s.e_lo, s.e_hi, s.spacing);
    CsvWriter series(ctx.file("series.csv"), {"t", "norm"});
    TwoBodyField last;
    for (double t : series_times(s)) {
        last = tabulate_two_body(solver, t, t, gph, ge);
        const double norm = std::sqrt(two_body_probability(last));
        series.row(std::vector<double>{t, norm});
        ctx.rec.times.push_back(t);
        ctx.rec.norms.push_back(norm);
        ctx.log << "  t = " << t << "  norm = " << norm << "\n";
    }
    if (s.snapshot) {
        CsvWriter w(ctx.file("snapshot.csv"), {"s_ph", "s_e", "component", "re", "im"});
        for (std::size_t i = 0; i < gph.count(); ++i)
            for (std::size_t j = 0; j < ge.count(); ++j) {
                if (!(gph.point(i) < ge.point(j)))
                    continue;
                for (int c = 0; c < 4; ++c) {
                    const cplx v = last.at(c, i, j);
                    w.row({format_double(gph.point(i)), format_double(ge.point(j)), sign_label(c, 2),
                           format_double(v.real()), format_double(v.imag())});
                }
            }
    }
}

ProbabilityBalance leaky_balance(Context& ctx)
{
    const Scenario& s = ctx.s;
    const auto initial = sample_three_body(three_body_data(s), wedge_grid(s));
    ctx.log << "  wedge nodes " << initial.grid.size() << ", " << steps_for(s) << " spacings to T\n";
    return probability_balance(initial, s.params, TransitionFunction(s.epsilon), s.T, s.step);
}

void run_equal_time(Context& ctx)
{
    const auto b = leaky_balance(ctx);
    CsvWriter series(ctx.file("series.csv"), {"t", "norm", "integrated_flux"});
    for (std::size_t k = 0; k < b.times.size(); ++k)
        series.row(std::vector<double>{b.times[k], b.norms[k], b.cumulative_flux[k]});
    ctx.rec.times = b.times;
    ctx.rec.norms = b.norms;
    ctx.rec.flux_total = b.integrated_flux;
    ctx.log << "  norm^2 " << b.initial_norm2 << " -> " << b.final_norm2 << ", integrated wall flux "
            << b.integrated_flux << "\n";
    if (ctx.s.snapshot)
        ctx.write_three_body_snapshot(b.final_state, "snapshot.csv");
}

void run_multitime(Context& ctx)
{
    const Scenario& s = ctx.s;
    const auto data = three_body_data(s);
    const double t0 = std::min({s.t_ph, s.t_e1, s.t_e2});
    const auto grid = wedge_grid(s);

    ThreeBodyInitialData second = data;
    if (t0 > 0.0) {
        const double n = t0 / s.spacing;
        if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
            throw DomainError("multitime: the smallest particle time must be a multiple of numerics.spacing");
        const auto run = leaky_evolve(sample_three_body(data, grid), s.params, TransitionFunction(s.epsilon), t0,
                                     s.step > 0.0 ? s.step : s.spacing);
        ctx.rec.times = run.times;
        ctx.rec.norms = run.norms;
        second = as_initial_data(run.final_state);
    }

    // Output configurations: strided grid nodes that the exact second leg can reach.
    std::vector<ThreeBodyConfig> configs;
    const double h = s.spacing;
    const long st = s.output_stride;
    grid.for_each([&](long i, long j, long k, std::size_t) {
        if (i % st || j % st || k % st)
            return;
        const ThreeBodyConfig c{{s.t_ph, i * h}, {s.t_e1, j * h}, {s.t_e2, k * h}};
        const ThreeBodyConfig rest{{s.t_ph - t0, c.ph.s}, {s.t_e1 - t0, c.e1.s}, {s.t_e2 - t0, c.e2.s}};
        try {
            require_three_body_s1(c);
            if (classify_three_body(rest) != RegionLabel::Coulomb)
                configs.push_back(c);
        } catch (const DomainError&) {
        }
    });
    ctx.log << "  " << configs.size() << " output configurations after the leg to t = " << t0 << "\n";

    std::vector<ThreeBodyValues> values(configs.size());
    for (std::size_t n = 0; n < configs.size(); ++n) {
        const auto& c = configs[n];
        const ThreeBodyConfig rest{{c.ph.t - t0, c.ph.s}, {c.e1.t - t0, c.e1.s}, {c.e2.t - t0, c.e2.s}};
        values[n] = evolve_exact(second, s.params, rest, s.quadrature_spacing);
    }
    CsvWriter w(ctx.file("snapshot.csv"), {"t_ph", "s_ph", "t_e1", "s_e1", "t_e2", "s_e2", "component", "re", "im"});
    for (std::size_t n = 0; n < configs.size(); ++n)
        for (int c = 0; c < 8; ++c) {
            const auto& x = configs[n];
            w.row({format_double(x.ph.t), format_double(x.ph.s), format_double(x.e1.t), format_double(x.e1.s),
                   format_double(x.e2.t), format_double(x.e2.s), sign_label(c, 3), format_double(values[n][c].real()),
                   format_double(values[n][c].imag())});
        }
}

void run_convergence(Context& ctx)
{
    const Scenario& s = ctx.s;
    const auto initial = sample_three_body(three_body_data(s), wedge_grid(s));
    const double n0 = norm_squared(initial);
    const auto rows = convergence_study(initial, s.params, s.T, s.epsilon_ladder);
    CsvWriter w(ctx.file("convergence.csv"), {"epsilon", "step", "norm", "leaked", "gap_to_next", "initial_norm"});
    for (const auto& r : rows) {
        w.row(std::vector<double>{r.epsilon, r.step, r.norm, r.leaked, r.gap_to_next, std::sqrt(n0)});
        ctx.log << "  eps " << r.epsilon << ": norm " << r.norm << ", leaked " << r.leaked << ", gap to next "
                << r.gap_to_next << "\n";
    }
}

// Fixed massless deficiency element used by the operator checks.
DeficiencyElement check_element()
{
    auto bump = [](double x0, double wx, double y0, double wy, cplx amp) -> Profile {
        return [=](double x, double y) {
            return amp * y * std::exp(-0.5 * (x - x0) * (x - x0) / (wx * wx) - 0.5 * (y - y0) * (y - y0) / (wy * wy));
        };
    };
    DeficiencyElement f;
    f.sign = -1;
    f.profiles = {bump(0.1, 0.3, 0.3, 0.25, 1.0), bump(-0.2, 0.35, 0.5, 0.3, {0.0, 0.7}),
                  bump(0.3, 0.3, 0.25, 0.2, {0.5, -0.4}), bump(0.0, 0.4, 0.4, 0.3, -0.8)};
    return f;
}

void run_verify(Context& ctx, unsigned seed)
{
    const Scenario& s = ctx.s;
    auto& checks = ctx.rec.checks;
    auto check = [&](const std::string& name, double measured, double threshold, bool pass) {
        checks.push_back({name, measured, threshold, pass});
        ctx.log << "  " << name << "  " << measured << "  " << threshold << "  " << (pass ? "PASS" : "FAIL") << "\n";
    };

    // Leaky run of the scenario.
    const auto b = leaky_balance(ctx);
    double rise = 0.0;
    for (std::size_t k = 1; k < b.norms.size(); ++k)
        rise = std::max(rise, (b.norms[k] - b.norms[k - 1]) / b.norms[0]);
    check("leaky_norm_non_increasing", rise, 1e-13, rise <= 1e-13);
    const double flux_diff = b.flux_check.max_difference;
    check("wall_flux_raw_vs_reduced", flux_diff, 1e-6, flux_diff < 1e-6);
    const double change = b.change();
    if (std::abs(change) > 1e-6 * b.initial_norm2) {
        const double rel = std::abs(change - b.integrated_flux) / std::abs(change);
        check("probability_balance_relative", rel, 2e-3, rel < 2e-3);
    } else {
        const double rel = std::max(std::abs(change), std::abs(b.integrated_flux)) / b.initial_norm2;
        check("probability_balance_free", rel, 1e-4, rel < 1e-4);
    }

    // Snapshot written and read back.
    const auto nodes = ctx.write_three_body_snapshot(b.final_state, "snapshot.csv");
    const auto table = read_csv((ctx.dir / "snapshot.csv").string());
    const bool complete_table = table.rows.size() == 8 * nodes.size();
    double worst = complete_table ? 0.0 : INFINITY;
    for (std::size_t r = 0; complete_table && r < table.rows.size(); ++r) {
        const cplx v = b.final_state.values[8 * nodes[r / 8] + r % 8];
        worst = std::max(worst, std::abs(cplx(table.number(r, "re"), table.number(r, "im")) - v));
    }
    check("csv_round_trip", worst, 0.0, complete_table && worst == 0.0);

    // Currents on random values.
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double min_density = INFINITY, bound = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        ThreeBodyValues v;
        for (auto& z : v)
            z = {normal(rng), normal(rng)};
        min_density = std::min(min_density, current_multitime(v)(0, 0, 0));
        const auto j = current_equal_time(v);
        bound = std::max({bound, std::abs(j.j1) - j.j0, std::abs(j.j2) - j.j0, std::abs(j.j3) - j.j0});
    }
    check("joint_density_positive", min_density, 0.0, min_density > 0.0);
    check("equal_time_current_bound", bound, 0.0, bound <= 0.0);

    // Joint conservation for a free field.
    const Gaussian ph{0.0, 0.08, 1.0}, e1{-1.3, 0.1, 0.5}, e2{1.3, 0.1, -1.0};
    const auto free_data = ThreeBodyInitialData::gaussians(
        {{comp3(-1, -1, +1), {1.0, 0.0}, ph, e1, e2}, {comp3(+1, +1, -1), {0.2, 0.4}, ph, e1, e2}}, 0.1);
    const auto mass = PhysicalParams::make(s.params.electron_mass, 0.0);
    auto field = [&](const ThreeBodyConfig& c) { return evolve_free_3(free_data, mass, c, 1.0 / 512); };
    const ThreeBodyConfig at{{0.2, 0.05}, {0.15, -1.25}, {0.25, 1.2}};
    const double d1 = joint_divergence(field, at, 0.02).max(), d2 = joint_divergence(field, at, 0.01).max();
    const double order = std::log2(d1 / d2);
    check("joint_divergence_order", order, 1.8, order > 1.8 && order < 2.2);

    // Deficiency kernels and the contraction.
    const auto f = check_element();
    const double r1 = deficiency_residual(f, 0.02), r2 = deficiency_residual(f, 0.01);
    const double dorder = std::log2(r1 / r2);
    check("deficiency_residual_order", dorder, 1.8, dorder > 1.8 && dorder < 2.2);
    const auto t0 = contraction_T(f, 0.0, s.params.theta1, s.params.theta2);
    const double unitarity = std::abs(t0.output_norm / t0.input_norm - 1.0);
    check("contraction_unitary_at_zero", unitarity, 1e-6, unitarity < 1e-6);
    double ratio = 0.0;
    for (double eps : s.epsilon_ladder) {
        const auto r = contraction_T(f, eps, s.params.theta1, s.params.theta2, WedgeQuadrature{-9, 9, 9, 1.0});
        ratio = std::max(ratio, r.output_norm / r.input_norm);
    }
    check("contraction_norm_ratio", ratio, 1.0, ratio < 1.0);

    CsvWriter w(ctx.file("verify_report.csv"), {"name", "measured", "threshold", "status"});
    for (const auto& c : checks)
        w.row({c.name, format_double(c.measured), format_double(c.threshold), c.pass ? "PASS" : "FAIL"});
}

void write_manifest(const Scenario& s, const RunRecord& rec, const fs::path& dir)
{
    nlohmann::json j;
    j["scenario"] = s.name;
    j["scenario_hash"] = rec.scenario_hash;
    j["mode"] = rec.mode;
    j["complete"] = rec.complete;
    if (!rec.error.empty())
        j["error"] = rec.error;
    j["threads"] = thread_count();
    j["seconds"] = rec.seconds;
    j["times"] = rec.times;
    j["norms"] = rec.norms;
    j["wall_flux_total"] = rec.flux_total;
    j["files"] = rec.files;
    for (const auto& c : rec.checks)
        j["checks"].push_back({{"name", c.name}, {"measured", c.measured}, {"threshold", c.threshold},
                               {"status", c.pass ? "PASS" : "FAIL"}});
    std::ofstream(dir / "manifest.json") << j.dump(2) << "\n";
}

} // namespace

RunRecord run_scenario(const Scenario& s, const RunOptions& options, std::ostream& log)
{
    const fs::path dir = options.out_dir.empty() ? fs::path(s.directory) : fs::path(options.out_dir);
    fs::create_directories(dir);

    RunRecord rec;
    rec.scenario_hash = scenario_hash(s);
    rec.mode = mode_name(s.mode);
    {
        std::ofstream resolved(dir / "scenario.ini");
        save_scenario(s, resolved);
    }
    rec.files.push_back("scenario.ini");
    log << "scenario " << s.name << " (" << rec.mode << ", hash " << rec.scenario_hash << ")\n";

    Context ctx(s, dir, rec, log);
    const auto start = std::chrono::steady_clock::now();
    try {
        switch (s.mode) {
        case Mode::Free:
            run_free(ctx);
            break;
        case Mode::TwoBody:
            run_two_body(ctx);
            break;
        case Mode::ThreeBodyEqualTime:
            run_equal_time(ctx);
            break;
        case Mode::ThreeBodyMultitime:
            run_multitime(ctx);
            break;
        case Mode::Convergence:
            run_convergence(ctx);
            break;
        case Mode::Verify:
            run_verify(ctx, options.seed);
            break;
        }
        rec.complete = true;
    } catch (const std::exception& e) {
        rec.error = e.what();
        log << "error: " << e.what() << "\n";
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(s, rec, dir);
    return rec;
}

} // namespace mtqm
