#pragma once

// Independent references for the Fock-space simulation: classical
// geodesics, a position-representation Crank-Nicolson solver, Ehrenfest
// residuals and Zitterbewegung diagnostics.

#include "cqrm/observables.hpp"

#include <array>
#include <vector>

namespace cqrm {

// ---------------------------------------------------------------------------
// Geodesics

// Solution of dx/dt = branch (x/r_s - 1) with x(0) = x0:
//   x(t) = r_s + (x0 - r_s) exp(branch t / r_s).
// branch = -1 falls toward the horizon, +1 escapes.
double massless_geodesic(double x0, double r_s, int branch, double t);

struct GeodesicState {
    double tau = 0.0;  // t / r_s
    double u = 0.0;    // X / r_s
    double du = 0.0;   // du/dtau
};

class StepTooLarge : public Error {
public:
    using Error::Error;
};

// RK4 for u'' = u/4 - u^3/2 (u = X/r_s, tau = t/r_s) from (u0, v0), returning
// steps + 1 states spaced by dtau. The conserved E = v^2/2 - u^2/8 + u^4/8
// is monitored; a drift above 1e-6 raises StepTooLarge.
std::vector<GeodesicState> massive_geodesic(double u0, double v0, double dtau, int steps);

// The same motion in the x coordinate: y = x/r_s - 1 = u^2 obeys
// y'' = y'^2/(2y) + y/2 - y^2. Integrated separately for cross-checks.
struct GeodesicStateX {
    double tau = 0.0;
    double y = 0.0;
    double dy = 0.0;
};
std::vector<GeodesicStateX> massive_geodesic_x(double y0, double dy0, double dtau, int steps);

// Conserved quantity of the rescaled massive geodesic.
double geodesic_energy(double u, double du);

// ---------------------------------------------------------------------------
// Position-representation solver

struct GridSpinor {
    RealVector X;  // uniform, strictly positive
    Vector up;
    Vector down;

    double spacing() const { return X[1] - X[0]; }
    // h * sum(|up|^2 + |down|^2)
    double norm2() const;
    RealVector density() const;
};

// Uniform grid on [lo, hi] with `points` nodes carrying
// pi^{-1/4} exp(-(X - X0)^2 / 2) (x) spin, normalized on the grid.
GridSpinor gaussian_packet(double lo, double hi, int points, double X0, SpinLabel spin);

class BoundaryMassViolation : public Error {
public:
    BoundaryMassViolation(const std::string& what, double t, double mass)
        : Error(what), t_(t), mass_(mass) {}
    double t() const { return t_; }
    double mass() const { return mass_; }

private:
    double t_;
    double mass_;
};

struct PdeConfig {
    double dt_step = 0.01;
    double boundary_fraction = 0.02;  // width of each monitored edge zone
    double boundary_tolerance = 1e-8;
};

struct PdeSnapshot {
    double t;
    GridSpinor psi;
};

struct PdeResult {
    std::vector<PdeSnapshot> snapshots;
    double max_norm_drift = 0.0;
    double max_boundary_mass = 0.0;
};

// Crank-Nicolson for
//   i d/dt psi = [ (1/(4 r_s)) sigma_x {X, P_h} + (m/r_s) X sigma_z ] psi,
// where P_h = -i D is the centered difference, so the discrete generator is
// Hermitian and the scheme is unitary. Dirichlet zero outside the grid.
// Snapshots are taken at the requested times (rounded to whole steps).
// Probability above boundary_tolerance in either edge zone aborts the run,
// except at a lower end within 1.5 spacings of X = 0, where the generator
// vanishes and no wall is needed.
PdeResult pde_evolve(const ModelParams& params, const GridSpinor& initial,
                     const std::vector<double>& snapshot_times, const PdeConfig& cfg = {});

// L1 distance int |rho_a - rho_b| dX on a shared grid (trapezoid).
double l1_distance(const RealVector& grid, const RealVector& a, const RealVector& b);

// ---------------------------------------------------------------------------
// Ehrenfest residuals
//
// r1 = D_t <X>  - <X sigma_x> / (2 r_s)
// r2 = D_tt <X> - [ <X> / (4 r_s^2) - (m / r_s^2) <X^2 sigma_y> ]
// r3 = D_t <x>  - <X^2 sigma_x> / r_s^2
// r4 = D_tt <x> - [ (<x>/r_s - 1) / r_s - (2 m / r_s^3) <X^3 sigma_y> ]
// with centered differences D_t, D_tt.

struct EhrenfestRow {
    double t = 0.0;
    std::array<double, 4> residual{};
    std::array<double, 4> lhs{};
};

struct EhrenfestTable {
    std::vector<EhrenfestRow> rows;
    std::array<double, 4> max_residual{};
    std::array<double, 4> max_lhs{};

    // max|r_i| / max|lhs_i|
    double relative(int i) const { return max_lhs[i] > 0.0 ? max_residual[i] / max_lhs[i] : 0.0; }
};

// Samples must be uniformly spaced (at least five).
EhrenfestTable ehrenfest_residuals(const std::vector<MomentSample>& samples, const ModelParams& params);

// ---------------------------------------------------------------------------
// Zitterbewegung

struct ZitterbewegungMetrics {
    std::vector<double> extrema_t;
    std::vector<double> extrema_X;
    std::vector<double> half_swings;  // |X_k - X_{k+1}| / 2 between consecutive extrema
    double early_envelope = 0.0;      // first half swing
    double late_envelope = 0.0;       // last half swing
    double envelope_ratio = 0.0;      // late / early
    double max_envelope = 0.0;
    // min over samples of sqrt(<X^4>) - |<X^2 sigma_y>|
    double cauchy_schwarz_slack = 0.0;
    bool complete = false;            // at least two extrema found
};

// Turning points of <X>(t) are accepted only once <X> has moved away from
// them by more than `noise`.
ZitterbewegungMetrics zitterbewegung_metrics(const std::vector<MomentSample>& samples,
                                             double noise = 1e-9);

// Initial d<X>/dt = <X sigma_x> / (2 r_s).
double zero_slope_check(const SpinorState& state, const ModelParams& params);

}  // namespace cqrm
