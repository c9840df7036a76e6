#pragma once

// Time evolution on the truncated space.
//
// Static Hamiltonians are exponentiated exactly through their spectral
// decomposition. Time-dependent ones use midpoint-exponential steps.
// A tail monitor watches the top Fock levels; once their occupation exceeds
// the threshold every later sample is marked untrusted.

#include "cqrm/hamiltonians.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <vector>

namespace cqrm {

class Propagator {
public:
    const RealVector& eigenvalues() const { return eigenvalues_; }
    const Matrix& eigenvectors() const { return eigenvectors_; }
    Eigen::Index dim() const { return eigenvalues_.size(); }
    int n_max() const { return n_max_; }

    // U(t) = V exp(-i Lambda t) V^dagger
    Matrix unitary(double t) const;
    Vector apply(const Vector& psi, double t) const;

    // Spectral norm of H.
    double spectral_norm() const;

private:
    friend Propagator make_propagator(const Operator& h);
    Propagator(RealVector eigenvalues, Matrix eigenvectors, int n_max);

    RealVector eigenvalues_;
    Matrix eigenvectors_;
    int n_max_;
};

// Throws InvalidArgument for a non-Hermitian H and NumericalFailure if the
// eigensolver does not converge.
Propagator make_propagator(const Operator& h);

struct EvolutionConfig {
    double t_max = 0.0;
    double dt_record = 1.0;
    double dt_step = 0.01;  // time-dependent runs only
    double tail_threshold = 1e-8;
    double tail_fraction = 0.05;

    void validate() const;
    // Sample times 0, dt_record, ..., t_max (an integer count of records).
    std::vector<double> sample_times() const;
};

struct TimedState {
    double t;
    SpinorState state;
    double tail;
    bool trusted;
};

struct TruncationWarning {
    double t;
    double tail;
};

struct EvolutionResult {
    std::vector<TimedState> samples;
    std::optional<TruncationWarning> warning;  // first sample over threshold

    // Last trusted sample time.
    double trusted_until() const;
};

// Read-only view handed to streaming consumers.
struct SampleView {
    double t;
    const Vector& amplitudes;
    double tail;
    bool trusted;
};

using SampleVisitor = std::function<void(const SampleView&)>;

// Streams every recorded sample to the visitor in time order without keeping
// the states. Samples are generated in blocks by one matrix product each.
std::optional<TruncationWarning> evolve_stream(const SpinorState& initial, const Propagator& prop,
                                               const EvolutionConfig& cfg,
                                               const SampleVisitor& visit);

EvolutionResult evolve(const SpinorState& initial, const Propagator& prop,
                       const EvolutionConfig& cfg);

using HamiltonianSchedule = std::function<Operator(double)>;

// Each step applies exp(-i H(t + dt_step/2) dt_step). dt_step must divide
// dt_record.
EvolutionResult evolve_td(const SpinorState& initial, const HamiltonianSchedule& hamiltonian,
                          const EvolutionConfig& cfg);

// exp(-i H dt) psi for a sparse Hermitian H, by Taylor series with
// sub-stepping so that every partial step has ||H dt|| <= 1/2.
Vector apply_exponential(const Eigen::SparseMatrix<Complex>& h, const Vector& psi, double dt);

struct RunSpec {
    double m_tilde = 0.3;
    double M_tilde = 0.01;
    double X0 = 8.0;
    SpinLabel spin = SpinLabel::PlusX;
    EvolutionConfig cfg;
};

struct ConvergenceRow {
    int n_lo;
    int n_hi;
    double window_end;     // trusted window of the smallest cutoff
    double max_abs_mean_x; // max_t |<x>_lo - <x>_hi|
    double max_rel_mean_x; // same, relative to <x>_hi
    double max_var_X;
    double max_var_P;
};

// Runs the RunSpec at each cutoff (non-decreasing, at least two) and
// compares adjacent pairs over the trusted window of the smallest cutoff.
std::vector<ConvergenceRow> convergence_scan(const RunSpec& spec, const std::vector<int>& cutoffs);

}  // namespace cqrm
