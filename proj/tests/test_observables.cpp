#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cqrm/evolution.hpp"
#include "cqrm/observables.hpp"

#include <cmath>
#include <numbers>

using namespace cqrm;

namespace {

// psi_n(X) from the factorial-normalized Hermite polynomials, for small n.
double hermite_reference(int n, double X) {
    double h0 = 1.0, h1 = 2.0 * X;
    double hn = n == 0 ? h0 : h1;
    for (int k = 1; k < n; ++k) {
        hn = 2.0 * X * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = hn;
    }
    const double norm = 1.0 / std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(std::numbers::pi));
    return norm * hn * std::exp(-0.5 * X * X);
}

}  // namespace

TEST_CASE("expectation values") {
    const FockCutoff cut(200);
    const auto psi = product_state(spinor(SpinLabel::PlusX), coherent_state(cut, 8.0));
    CHECK(std::abs(expectation(Operator::identity(Space::Composite, 200), psi) - 1.0) < 1e-12);
    const Operator sx = tensor(pauli(Pauli::X), Operator::identity(Space::Boson, 200));
    CHECK(std::abs(expectation(sx, psi) - 1.0) < 1e-12);
    const auto [X, P] = build_quadratures(cut);
    const Complex mX = expectation(tensor(pauli(Pauli::I), X), psi);
    CHECK(std::abs(mX - 8.0) < 1e-10);
    CHECK(std::abs(mX.imag()) < 1e-12);
    CHECK_THROWS_AS(expectation(Operator::identity(Space::Composite, 10), psi), DimensionMismatch);
}

TEST_CASE("records of simple states") {
    const ModelParams p(0.3, 0.01, FockCutoff(400));
    const auto fig1 = product_state(spinor(SpinLabel::PlusX), coherent_state(p.cutoff(), 8.0));
    const auto r = record(fig1, p, 0.0);
    // <X^2> = X0^2 + 1/2 for a coherent state
    CHECK(r.mean_X2 == doctest::Approx(64.5).epsilon(1e-12));
    CHECK(r.mean_x == doctest::Approx(64.5 / 50.0 + 50.0).epsilon(1e-12));
    CHECK(std::abs(r.mean_x - 51.29) < 1e-9);
    CHECK(std::abs((r.mean_x - p.r_s()) - r.mean_X2 / p.r_s()) <= 1e-14);
    CHECK(std::abs(r.sx - 1.0) < 1e-12);
    CHECK(std::abs(r.sy) < 1e-12);
    CHECK(std::abs(r.sz) < 1e-12);
    CHECK(r.redshift(p.r_s()) == doctest::Approx(8.0 / 50.0));
    CHECK(std::abs(r.cov_XP) < 1e-10);

    const auto vac = product_state(spinor(SpinLabel::PlusZ), fock_state(p.cutoff(), 0));
    const auto v = record(vac, p, 0.0);
    CHECK(v.var_X == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(v.var_P == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(v.var_X * v.var_P - 0.25) < 1e-15);
    CHECK(v.sz == doctest::Approx(1.0));
}

TEST_CASE("moments agree with dense operator products") {
    const ModelParams p(0.3, 0.01, FockCutoff(80));
    const Vector amps = (Vector::Random(160)).normalized();
    const auto psi = SpinorState(p.cutoff(), amps);
    const auto [X, P] = build_quadratures(p.cutoff());
    const auto I = Operator::identity(Space::Boson, 80);
    const ObservableSet obs(p);
    const auto m = obs.moments(amps, 0.0);
    const auto e = [&](Pauli s, const Operator& b) { return expectation(tensor(pauli(s), b), psi).real(); };
    CHECK(m.X == doctest::Approx(e(Pauli::I, X)).epsilon(1e-12));
    CHECK(m.X2 == doctest::Approx(e(Pauli::I, X * X)).epsilon(1e-12));
    CHECK(m.X4 == doctest::Approx(e(Pauli::I, X * X * X * X)).epsilon(1e-12));
    CHECK(m.X_sx == doctest::Approx(e(Pauli::X, X)).epsilon(1e-12));
    CHECK(m.X2_sx == doctest::Approx(e(Pauli::X, X * X)).epsilon(1e-12));
    CHECK(m.X2_sy == doctest::Approx(e(Pauli::Y, X * X)).epsilon(1e-12));
    CHECK(m.X3_sy == doctest::Approx(e(Pauli::Y, X * X * X)).epsilon(1e-12));
    const auto r = obs.record(psi, 0.0);
    CHECK(r.sy == doctest::Approx(e(Pauli::Y, I)).epsilon(1e-12));
    CHECK(r.energy == doctest::Approx(expectation(build_dirac_bh(p), psi).real()).epsilon(1e-12));
    const double sym = 0.5 * expectation(tensor(pauli(Pauli::I), anticommutator(X, P)), psi).real();
    CHECK(r.cov_XP == doctest::Approx(sym - r.mean_X * e(Pauli::I, P)).epsilon(1e-9));
}

TEST_CASE("Hermite functions") {
    for (int n : {0, 1, 2, 5, 12}) {
        for (double X : {-3.0, -0.4, 0.0, 1.1, 4.0}) {
            CHECK(hermite_functions(n + 1, X)[n] == doctest::Approx(hermite_reference(n, X)).epsilon(1e-12));
        }
    }
    // deep in the classically allowed region at high order; checked against
    // the orthonormality sum_n psi_n(X)^2 ~ sqrt(2N)/pi near X = 0
    const RealVector h = hermite_functions(1600, 0.3);
    CHECK(h.allFinite());
    CHECK(h.squaredNorm() == doctest::Approx(std::sqrt(2.0 * 1600) / std::numbers::pi).epsilon(0.01));
    CHECK(hermite_functions(800, 60.0).allFinite());
}

TEST_CASE("densities") {
    const ModelParams p(0.3, 0.01, FockCutoff(200));
    const auto vac = product_state(spinor(SpinLabel::PlusZ), fock_state(p.cutoff(), 0));
    RealVector zero(1);
    zero << 0.0;
    CHECK(density_X(vac, zero).density[0] == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)));
    const auto one = product_state(spinor(SpinLabel::PlusZ), fock_state(p.cutoff(), 1));
    CHECK(std::abs(density_X(one, zero).density[0]) < 1e-300);

    const auto psi = product_state(spinor(SpinLabel::PlusX), coherent_state(p.cutoff(), 8.0));
    const auto rec = record(psi, p, 0.0);
    const auto prof = density_X(psi, default_X_grid(rec));
    Eigen::Index peak;
    prof.density.maxCoeff(&peak);
    const double h = prof.grid[1] - prof.grid[0];
    CHECK(std::abs(prof.grid[peak] - 8.0) <= h);
    CHECK(prof.captured() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK((prof.density.array() >= 0.0).all());

    const auto px = density_x(psi, p, default_x_grid(rec, p));
    CHECK(px.captured() == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(density_X(psi, uniform_grid(1.0, 0.0, 2)), InvalidArgument);
    RealVector bad(2);
    bad << 2.0, 1.0;
    CHECK_THROWS_AS(density_X(psi, bad), InvalidArgument);
    CHECK_THROWS_AS(density_x(psi, p, uniform_grid(50.0, 60.0, 10)), InvalidArgument);
}

TEST_CASE("change of variables preserves probability") {
    const ModelParams p(0.3, 0.1, FockCutoff(120));  // r_s = 5
    const auto psi = product_state(spinor(SpinLabel::PlusX), coherent_state(p.cutoff(), 3.0));
    const double X1 = 1.5, X2 = 4.5;
    const double rs = p.r_s();
    const auto pX = density_X(psi, uniform_grid(X1, X2, 20001));
    const auto px = density_x(psi, p, uniform_grid(X1 * X1 / rs + rs, X2 * X2 / rs + rs, 20001));
    CHECK(px.captured() == doctest::Approx(pX.captured()).epsilon(1e-6));

    // narrow packet: x-space peak sits at the image of the X-space peak,
    // pulled in by the Jacobian 1/X by exactly 1/r_s
    const ModelParams q(0.3, 0.01, FockCutoff(200));
    const auto narrow = product_state(spinor(SpinLabel::PlusX), coherent_state(q.cutoff(), 8.0));
    const auto qx = density_x(narrow, q, uniform_grid(50.5, 52.5, 40001));
    Eigen::Index peak;
    qx.density.maxCoeff(&peak);
    CHECK(std::abs(qx.grid[peak] - (64.0 / 50.0 + 50.0 - 1.0 / 50.0)) <= 2e-4);
}

TEST_CASE("negative-side leakage") {
    const FockCutoff cut(200);
    CHECK(negative_side_leakage(product_state(spinor(SpinLabel::PlusX), coherent_state(cut, 8.0))) <= 1e-12);
    CHECK(negative_side_leakage(product_state(spinor(SpinLabel::PlusX), coherent_state(cut, 0.0))) ==
          doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("leakage does not grow on the escaping massless branch") {
    const ModelParams p(0.0, 0.01, FockCutoff(300));
    const auto psi0 = product_state(spinor(SpinLabel::PlusX), coherent_state(p.cutoff(), 4.0));
    EvolutionConfig cfg;
    cfg.t_max = 60.0;
    cfg.dt_record = 20.0;
    const auto res = evolve(psi0, make_propagator(build_dirac_bh(p)), cfg);
    double prev = 1.0;
    for (const auto& s : res.samples) {
        REQUIRE(s.trusted);
        const double leak = negative_side_leakage(s.state);
        CHECK(leak <= prev + 1e-13);
        prev = leak;
    }
}

TEST_CASE("uncertainty relation along a massive run") {
    const ModelParams p(0.3, 0.01, FockCutoff(300));
    const auto psi0 = product_state(spinor(SpinLabel::PlusX), coherent_state(p.cutoff(), 8.0));
    EvolutionConfig cfg;
    cfg.t_max = 60.0;
    cfg.dt_record = 0.5;
    const ObservableSet obs(p);
    evolve_stream(psi0, make_propagator(build_dirac_bh(p)), cfg, [&](const SampleView& s) {
        const auto r = obs.record(s.amplitudes, s.t, s.tail, s.trusted);
        CHECK(r.var_X * r.var_P >= 0.25 - 1e-9);
        CHECK(r.var_X >= 0.0);
        if (r.trusted) CHECK(r.mean_x >= p.r_s() - 1e-9);
    });
}

TEST_CASE("fringe counter") {
    const RealVector grid = uniform_grid(0.0, 10.0, 2001);
    DensityProfile single{Coordinate::IonX, grid, (-(grid.array() - 5.0).square()).exp().matrix()};
    CHECK(count_fringes(single) == 1);

    RealVector comb(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const double env = std::exp(-std::pow(grid[i] - 5.0, 2) / 8.0);
        comb[i] = env * std::pow(std::cos(2.0 * grid[i]), 2);
    }
    DensityProfile fringes{Coordinate::IonX, grid, comb};
    CHECK(count_fringes(fringes) >= 3);

    // shallow ripples do not count
    RealVector ripple(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        ripple[i] = std::exp(-std::pow(grid[i] - 5.0, 2) / 8.0) * (1.0 + 0.1 * std::cos(6.0 * grid[i]));
    }
    DensityProfile shallow{Coordinate::IonX, grid, ripple};
    CHECK(count_fringes(shallow) == 1);
}
