#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mtqm/free.hpp"
#include "mtqm/verification.hpp"
#include "three_body_fixtures.hpp"

using namespace mtqm;

namespace {

using Mat = std::array<std::array<cplx, 2>, 2>;

Mat mul(const Mat& a, const Mat& b)
{
    Mat c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                c[i][j] += a[i][k] * b[k][j];
    return c;
}

Mat adjoint(const Mat& a)
{
    Mat c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            c[i][j] = std::conj(a[j][i]);
    return c;
}

const Mat gamma0{{{0.0, 1.0}, {1.0, 0.0}}};
const Mat gamma1{{{0.0, -1.0}, {1.0, 0.0}}};

// Photon basis: chi_- sits above the diagonal, chi_+ below.
Mat photon_unit(int bit)
{
    Mat m{};
    (bit ? m[1][0] : m[0][1]) = 1.0;
    return m;
}

// (1/4) tr_ph { Psibar gamma_ph^mu gamma_e1^nu gamma_e2^kappa Psi gamma_ph(X) } with X = d/dt,
// expanded over pairs of basis tensors.
double trace_oracle(const ThreeBodyValues& psi, int mu, int nu, int kappa)
{
    const Mat& gm = mu ? gamma1 : gamma0;
    auto electron = [](int a, int b, int index) {
        // e_a^dagger gamma^0 gamma^index e_b.
        const Mat g = mul(gamma0, index ? gamma1 : gamma0);
        return g[a][b];
    };
    cplx acc = 0.0;
    for (int c = 0; c < 8; ++c)
        for (int d = 0; d < 8; ++d) {
            const Mat bar = mul(mul(gamma0, adjoint(photon_unit(c >> 2))), gamma0);
            const Mat m = mul(mul(mul(bar, gm), photon_unit(d >> 2)), gamma0);
            const cplx ph = m[0][0] + m[1][1];
            acc += std::conj(psi[c]) * psi[d] * ph * electron((c >> 1) & 1, (d >> 1) & 1, nu) *
                   electron(c & 1, d & 1, kappa);
        }
    CHECK(std::abs(acc.imag()) < 1e-14);
    return 0.25 * acc.real();
}

ThreeBodyValues random_values(std::mt19937& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    ThreeBodyValues v;
    for (auto& z : v)
        z = {n(rng), n(rng)};
    return v;
}

Profile bump(double x0, double wx, double y0, double wy, cplx amp = 1.0)
{
    return [=](double x, double y) {
        return amp * y * std::exp(-0.5 * (x - x0) * (x - x0) / (wx * wx) - 0.5 * (y - y0) * (y - y0) / (wy * wy));
    };
}

DeficiencyElement minus_element()
{
    DeficiencyElement f;
    f.sign = -1;
    f.profiles = {bump(0.1, 0.3, 0.3, 0.25), bump(-0.2, 0.35, 0.5, 0.3, {0.0, 0.7}),
                  bump(0.3, 0.3, 0.25, 0.2, {0.5, -0.4}), bump(0.0, 0.4, 0.4, 0.3, -0.8)};
    return f;
}

} // namespace

TEST_CASE("current_multitime matches the matrix trace")
{
    ThreeBodyValues single{};
    single[0] = 1.0;
    for (int n = 0; n < 8; ++n) {
        CHECK(trace_oracle(single, n >> 2, (n >> 1) & 1, n & 1) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(current_multitime(single).j[n] == doctest::Approx(0.25).epsilon(1e-15));
    }
    for (double v : current_multitime(ThreeBodyValues{}).j)
        CHECK(v == 0.0);

    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto psi = random_values(rng);
        const auto j = current_multitime(psi);
        for (int n = 0; n < 8; ++n)
            CHECK(std::abs(j.j[n] - trace_oracle(psi, n >> 2, (n >> 1) & 1, n & 1)) < 1e-13);
        double norm = 0.0;
        for (auto z : psi)
            norm += std::norm(z);
        CHECK(j(0, 0, 0) == doctest::Approx(0.25 * norm).epsilon(1e-14));
        CHECK(j(0, 0, 0) > 0.0);
    }
}

TEST_CASE("current_equal_time")
{
    ThreeBodyValues plus{};
    plus[7] = 1.0;
    const auto j = current_equal_time(plus);
    CHECK(j.j0 == 1.0);
    CHECK(j.j1 == -1.0);
    CHECK(j.j2 == -1.0);
    CHECK(j.j3 == -1.0);

    ThreeBodyValues flat;
    for (int c = 0; c < 8; ++c)
        flat[c] = std::polar(0.5, 0.3 * c);
    const auto f = current_equal_time(flat);
    CHECK(std::abs(f.j1) < 1e-15);
    CHECK(std::abs(f.j2) < 1e-15);
    CHECK(std::abs(f.j3) < 1e-15);

    std::mt19937 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto r = current_equal_time(random_values(rng));
        CHECK(std::abs(r.j1) <= r.j0);
        CHECK(std::abs(r.j2) <= r.j0);
        CHECK(std::abs(r.j3) <= r.j0);
    }
}

TEST_CASE("wall flux formulas")
{
    std::mt19937 rng(3);
    const auto psi = random_values(rng);
    CHECK(wall_flux_reduced(psi, 1.0, Wall::C1) == 0.0);
    CHECK(wall_flux_reduced(psi, 1.0, Wall::C2) == 0.0);

    ThreeBodyValues in1{};
    in1[comp3(+1, -1, -1)] = 1.0;
    CHECK(wall_flux_reduced(in1, 0.0, Wall::C1) == doctest::Approx(-1.0 / std::numbers::sqrt2));
    CHECK(wall_flux(in1, Wall::C1) == doctest::Approx(-1.0 / std::numbers::sqrt2));

    // A field obeying the leaky conditions gives the same raw and reduced flux.
    for (double m : {0.0, 0.3, 1.0}) {
        ThreeBodyValues v = psi;
        const cplx p1 = std::polar(m, 0.4), p2 = std::polar(m, 1.1);
        v[comp3(-1, +1, -1)] = p1 * v[comp3(+1, -1, -1)];
        v[comp3(-1, +1, +1)] = p1 * v[comp3(+1, -1, +1)];
        CHECK(std::abs(wall_flux(v, Wall::C1) - wall_flux_reduced(v, m, Wall::C1)) < 1e-14);
        v = psi;
        v[comp3(+1, -1, -1)] = p2 * v[comp3(-1, -1, +1)];
        v[comp3(+1, +1, -1)] = p2 * v[comp3(-1, +1, +1)];
        CHECK(std::abs(wall_flux(v, Wall::C2) - wall_flux_reduced(v, m, Wall::C2)) < 1e-14);
        CHECK(wall_flux_reduced(v, m, Wall::C2) <= 0.0);
    }
}

TEST_CASE("probability balance of leaky runs")
{
    const double h = 1.0 / 64;
    const auto grid = WedgeGrid::covering(h, -1.0, 1.4, -1.6, 2.0);
    const auto initial = sample_three_body(fixture::bounce_data(), grid);
    const auto params = PhysicalParams::make(1.0, 0.3, 0.9);

    // Only the first bounce, with the electrons 0.45 apart.
    std::vector<double> totals;
    for (double eps : {0.4, 0.3}) {
        const auto b = probability_balance(initial, params, TransitionFunction(eps), 0.375);
        MESSAGE("eps " << eps << ": norm change " << b.change() << ", integrated flux " << b.integrated_flux);
        CHECK(b.change() < 0.0);
        CHECK(b.integrated_flux < 0.0);
        CHECK(std::abs(b.change() - b.integrated_flux) < 2e-3 * std::abs(b.change()));
        CHECK(b.flux_check.max_difference < 1e-6 * std::max(1.0, b.flux_check.max_flux));
        CHECK(b.flux_check.samples > 0);
        totals.push_back(std::abs(b.integrated_flux));
    }
    CHECK(totals[1] <= totals[0]);

    // Packets that never reach a wall.
    const Gaussian ph{0.0, 0.05, 0.0}, e1{-0.6, 0.05, 0.0}, e2{0.6, 0.05, 0.0};
    const auto apart = ThreeBodyInitialData::gaussians({{comp3(-1, +1, -1), {1.0, 0.0}, ph, e1, e2}}, 0.1);
    const auto g2 = WedgeGrid::covering(1.0 / 32, -0.4, 1.0, -1.6, 1.8);
    const auto free_run = probability_balance(sample_three_body(apart, g2), PhysicalParams::make(0.0, 0.3, 0.9),
                                              TransitionFunction(0.2), 0.5);
    CHECK(std::abs(free_run.change()) < 1e-4 * free_run.initial_norm2);
    CHECK(std::abs(free_run.integrated_flux) < 1e-4 * free_run.initial_norm2);
}

TEST_CASE("joint current is conserved by the free evolution")
{
    const Gaussian ph{0.0, 0.08, 1.0}, e1{-1.3, 0.1, 0.5}, e2{1.3, 0.1, -1.0};
    const auto d = ThreeBodyInitialData::gaussians(
        {{comp3(-1, -1, +1), {1.0, 0.0}, ph, e1, e2}, {comp3(+1, +1, -1), {0.2, 0.4}, ph, e1, e2}}, 0.1);
    const auto params = PhysicalParams::make(1.0, 0.0);
    auto field = [&](const ThreeBodyConfig& c) { return evolve_free_3(d, params, c, 1.0 / 512); };
    const ThreeBodyConfig c{{0.2, 0.05}, {0.15, -1.25}, {0.25, 1.2}};
    std::vector<double> res;
    for (double h : {0.04, 0.02, 0.01}) {
        const auto div = joint_divergence(field, c, h);
        MESSAGE("h " << h << ": divergences " << div.photon << " " << div.electron1 << " " << div.electron2
                     << " (scale " << div.scale << ")");
        res.push_back(div.max());
    }
    const double order = std::log2(res[1] / res[2]);
    MESSAGE("measured order " << order);
    CHECK(res[0] / res[1] > 3.0);
    CHECK(order > 1.8);
    CHECK(order < 2.2);
}

TEST_CASE("deficiency elements")
{
    DeficiencyElement zero;
    CHECK(deficiency_residual(zero, 0.02) == 0.0);

    for (int sign : {+1, -1}) {
        DeficiencyElement e;
        e.sign = sign;
        e.profiles[sign > 0 ? 0 : 2] = bump(0.2, 0.3, 0.9, 0.3);
        std::vector<double> r;
        for (double h : {0.04, 0.02, 0.01})
            r.push_back(deficiency_residual(e, h));
        const double o1 = std::log2(r[0] / r[1]), o2 = std::log2(r[1] / r[2]);
        MESSAGE("sign " << sign << ": residuals " << r[0] << " " << r[1] << " " << r[2]);
        CHECK(o1 > 1.8);
        CHECK(o1 < 2.2);
        CHECK(o2 > 1.8);
        CHECK(o2 < 2.2);

        e.rate = 2.0;
        CHECK(deficiency_residual(e, 0.01) > 0.1);
    }

    // The full four-profile elements satisfy their equations too.
    const auto f = minus_element();
    CHECK(deficiency_residual(f, 0.005) < 1e-3);
    const auto g = contraction_image(f, 0.1, 0.3, 1.2);
    CHECK(deficiency_residual(g, 0.005) < 1e-3);
}

TEST_CASE("contraction_T")
{
    DeficiencyElement empty;
    empty.sign = -1;
    const auto z = contraction_T(empty, 0.2, 0.3, 0.9);
    CHECK(z.input_norm == 0.0);
    CHECK(z.output_norm == 0.0);

    const auto f = minus_element();
    const double th1 = 0.7, th2 = 2.3;
    const auto unitary = contraction_T(f, 0.0, th1, th2);
    MESSAGE("norms " << unitary.input_norm << " -> " << unitary.output_norm);
    CHECK(std::abs(unitary.output_norm / unitary.input_norm - 1.0) < 1e-6);

    double previous = INFINITY;
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        const auto r = contraction_T(f, eps, th1, th2);
        CHECK(r.output_norm < r.input_norm * (1.0 - 1e-6));
        const double gap = deficiency_distance(r.image, unitary.image) / r.input_norm;
        MESSAGE("eps " << eps << ": ||T f|| / ||f|| = " << r.output_norm / r.input_norm << ", distance to T0 " << gap);
        CHECK(gap < previous);
        previous = gap;
    }
}

TEST_CASE("Psi_- + T Psi_- satisfies the leaky wall conditions")
{
    const auto f = minus_element();
    const double eps = 0.15, th1 = 0.4, th2 = 1.9;
    const auto g = contraction_image(f, eps, th1, th2);
    const TransitionFunction mu(eps);
    const cplx p1 = std::polar(1.0, th1), p2 = std::polar(1.0, th2);
    double worst = 0.0;
    for (double sp = -1.0; sp <= 1.0; sp += 0.1)
        for (double r = 0.0; r <= 1.5; r += 0.05) {
            auto sum = [&](double s, double st) {
                auto a = f.evaluate(sp, s, st);
                const auto b = g.evaluate(sp, s, st);
                for (int c = 0; c < 8; ++c)
                    a[c] += b[c];
                return a;
            };
            const auto w1 = sum(0.0, r);
            worst = std::max(worst, std::abs(w1[comp3(-1, +1, -1)] - p1 * mu(r) * w1[comp3(+1, -1, -1)]));
            worst = std::max(worst, std::abs(w1[comp3(-1, +1, +1)] - p1 * mu(r) * w1[comp3(+1, -1, +1)]));
            const auto w2 = sum(r, 0.0);
            worst = std::max(worst, std::abs(w2[comp3(+1, -1, -1)] - p2 * mu(r) * w2[comp3(-1, -1, +1)]));
            worst = std::max(worst, std::abs(w2[comp3(+1, +1, -1)] - p2 * mu(r) * w2[comp3(-1, +1, +1)]));
        }
    CHECK(worst < 1e-6);
}

TEST_CASE("transform_components")
{
    std::mt19937 rng(9);
    const auto psi = random_values(rng);
    using K = Transformation::Kind;
    CHECK(transform_components(psi, {K::Boost, 0.0}) == psi);
    CHECK(transform_components(transform_components(psi, {K::Parity}), {K::Parity}) == psi);
    CHECK(transform_components(transform_components(psi, {K::TimeReversal}), {K::TimeReversal}) == psi);
    const auto b = transform_components(transform_components(psi, {K::Boost, 0.3}), {K::Boost, -0.3});
    for (int c = 0; c < 8; ++c)
        CHECK(std::abs(b[c] - psi[c]) < 1e-14);
    CHECK(transform_components(psi, {K::Boost, 0.5})[0] == std::exp(1.0) * psi[0]);

    // Free photon: boost the data, then transport, against transport, then boost.
    const double a = 0.4, h = 1.0 / 256;
    const Grid1D grid = Grid1D::covering(-4.0, 4.0, h);
    auto chi_m = [](double x) { return cplx(std::exp(-x * x / 0.18), 0.0); };
    auto chi_p = [](double x) { return std::exp(-(x - 0.3) * (x - 0.3) / 0.08) * std::polar(1.0, 2.0 * x); };
    const PhotonBispinor original(SampledField1D::sample(grid, chi_m), SampledField1D::sample(grid, chi_p));
    // Component factors as applied to a photon with both electrons '-'.
    auto factor = [&](int bit) {
        ThreeBodyValues unit{};
        unit[4 * bit] = 1.0;
        return transform_components(unit, {K::Boost, a})[4 * bit];
    };
    const PhotonBispinor boosted(
        SampledField1D::sample(grid, [&](double x) { return factor(0) * chi_m(std::exp(a) * x); }),
        SampledField1D::sample(grid, [&](double x) { return factor(1) * chi_p(std::exp(-a) * x); }));
    double worst = 0.0;
    for (double t : {0.3, 0.8})
        for (double s = -1.5; s <= 1.5; s += 0.0371) {
            // The boosted point (t, s) comes from x = Lambda^{-1}(t, s).
            const double t0 = std::cosh(a) * t - std::sinh(a) * s, s0 = std::cosh(a) * s - std::sinh(a) * t;
            const auto [m0, p0] = photon_transport(original, t0, s0);
            const auto [m1, p1] = photon_transport(boosted, t, s);
            worst = std::max({worst, std::abs(factor(0) * m0 - m1), std::abs(factor(1) * p0 - p1)});
        }
    MESSAGE("two-path difference " << worst);
    CHECK(worst < 1e-6);
}
