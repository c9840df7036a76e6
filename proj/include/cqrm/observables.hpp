#pragma once

// Observables of the ion (X, P, spin) and of the simulated Dirac particle,
// whose position is x = X^2 / r_s + r_s.

#include "cqrm/hamiltonians.hpp"

#include <Eigen/Sparse>

#include <optional>
#include <vector>

namespace cqrm {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

struct TrajectoryRecord {
    double t = 0.0;
    double mean_X = 0.0;
    double mean_X2 = 0.0;
    double mean_x = 0.0;  // mean_X2 / r_s + r_s
    double var_X = 0.0;
    double var_P = 0.0;
    double cov_XP = 0.0;  // <(XP + PX)/2> - <X><P>
    double sx = 0.0;
    double sy = 0.0;
    double sz = 0.0;
    double energy = 0.0;
    double norm = 0.0;
    double tail = 0.0;
    bool trusted = true;

    // Gravitational redshift sqrt(g00) = X / r_s.
    double redshift(double r_s) const { return mean_X / r_s; }
};

// Spin-resolved moments used by the Ehrenfest and Zitterbewegung oracles.
// Products such as X sigma_x are Schroedinger-picture operators evaluated on
// the state at time t.
struct MomentSample {
    double t = 0.0;
    double X = 0.0;
    double X2 = 0.0;
    double X4 = 0.0;
    double X_sx = 0.0;
    double X2_sx = 0.0;
    double X2_sy = 0.0;
    double X3_sy = 0.0;
};

// Precomputed sparse operators for one parameter set. Immutable after
// construction and safe to share between threads.
class ObservableSet {
public:
    // Energy is measured with H_D unless a different Hamiltonian is supplied.
    explicit ObservableSet(const ModelParams& params, const std::optional<Operator>& hamiltonian = {});

    const ModelParams& params() const { return params_; }

    TrajectoryRecord record(const Vector& psi, double t, double tail, bool trusted) const;
    TrajectoryRecord record(const SpinorState& state, double t) const;
    MomentSample moments(const Vector& psi, double t) const;

    double energy(const Vector& psi) const;

private:
    ModelParams params_;
    SparseMatrix X_;  // boson space
    SparseMatrix P_;
    SparseMatrix H_;  // composite space
};

// <psi|A|psi>
Complex expectation(const Operator& op, const SpinorState& state);

TrajectoryRecord record(const SpinorState& state, const ModelParams& params, double t);

enum class Coordinate { IonX, ParticleX };

struct DensityProfile {
    Coordinate coordinate = Coordinate::IonX;
    RealVector grid;
    RealVector density;

    // Trapezoid integral of the density over the grid.
    double captured() const;
};

// Harmonic-oscillator eigenfunctions psi_0..psi_{n-1} at one point via the
// normalized recurrence, with running rescaling so that large |X| and large n
// neither overflow nor underflow prematurely.
RealVector hermite_functions(int n, double X);

// rho(X) = sum_s |sum_n c_{s,n} psi_n(X)|^2. Grid must be strictly increasing.
DensityProfile density_X(const SpinorState& state, const RealVector& grid);

// rho_x(x) = rho_X(X(x)) r_s / (2 X(x)), X(x) = r_s sqrt(x/r_s - 1).
// Every grid point must exceed r_s.
DensityProfile density_x(const SpinorState& state, const ModelParams& params,
                         const RealVector& grid_x);

// Default 4096-point grids: [-5, X_max + 5] with X_max = <X> + 6 dX, and
// [r_s + 1e-3, <x> + 10].
RealVector default_X_grid(const TrajectoryRecord& rec, int points = 4096);
RealVector default_x_grid(const TrajectoryRecord& rec, const ModelParams& params, int points = 4096);

RealVector uniform_grid(double lo, double hi, int points);

// Probability mass at X < 0 (Simpson rule on [-L, 0]).
double negative_side_leakage(const SpinorState& state);

// Counts peaks separated by deep minima: adjacent local maxima (ignoring
// those below floor_fraction of the global maximum) are distinct fringes when
// the minimum between them is below `depth` times the smaller of the two.
int count_fringes(const DensityProfile& profile, double depth = 0.5, double floor_fraction = 1e-2);

}  // namespace cqrm
