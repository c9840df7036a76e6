#pragma once

// Hamiltonian builders for the multiphoton quantum Rabi model and its
// black-hole / naked-source Dirac realizations.
//
// With hbar = c = lambda = 1 the black-hole Dirac Hamiltonian reads
//
//   H_D = (1/(4 r_s)) sigma_x (x) {X,P} + (m / r_s) sigma_z (x) X,
//
// where {X,P} = (1/i)(a^2 - a^dagger^2) and r_s = 1/(2M). Restoring units,
// the squeeze term carries hbar c / (4 r_s) and the mass term m c^2 / r_s.

#include "cqrm/hilbert.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cqrm {

class ModelParams {
public:
    // Throws InvalidArgument unless m_tilde >= 0 and M_tilde > 0.
    ModelParams(double m_tilde, double M_tilde, FockCutoff cutoff);

    double m_tilde() const { return m_tilde_; }
    double M_tilde() const { return M_tilde_; }
    // Schwarzschild radius 1/(2M).
    double r_s() const { return r_s_; }
    FockCutoff cutoff() const { return cutoff_; }

    ModelParams with_cutoff(FockCutoff cutoff) const { return {m_tilde_, M_tilde_, cutoff}; }

private:
    double m_tilde_;
    double M_tilde_;
    double r_s_;
    FockCutoff cutoff_;
};

struct QrmParams {
    double omega = 0.0;   // mode frequency
    double omega0 = 0.0;  // qubit splitting
    double g = 0.0;       // one-photon coupling
    double kappa = 0.0;   // two-photon coupling
};

// H_R = omega a^dag a + (omega0/2) sigma_z + g sigma_x (a + a^dag)
//       + kappa sigma_x (a^2 + a^dag^2)
Operator build_qrm(const QrmParams& q, FockCutoff cutoff);

Operator build_dirac_bh(const ModelParams& p);

// Same operator with the squeeze generator taken as the matrix product
// anticommutator(X, P). Differs from build_dirac_bh only at the top two
// Fock levels.
Operator build_dirac_bh_from_quadratures(const ModelParams& p);

// Trapped-ion form: sigma_z -> sigma_y in the mass term. Related to H_D by
// R H_ion R^dag = H_D with R = exp(-i sigma_x pi/4).
Operator build_dirac_bh_iontrap(const ModelParams& p);

// The spin rotation R above, embedded in the composite space.
Operator iontrap_rotation(FockCutoff cutoff);

// Weak-field naked source:
//   H = sigma_x P + (M/4) sigma_x {X,P} + m sigma_z (1 + M X).
Operator build_naked_source(const ModelParams& p);

// Flat-space Dirac Hamiltonian sigma_x P + m sigma_z.
Operator build_flat_dirac(const ModelParams& p);

struct TermDifference {
    std::string term;
    double max_abs_diff = 0.0;
    double frobenius_diff = 0.0;
    double frobenius_reference = 0.0;
    double relative = 0.0;  // frobenius_diff / frobenius_reference
};

struct DisplacementReport {
    double displacement = 0.0;   // shift applied to X (D^dag X D = X + shift)
    double discarded_probability = 0.0;
    int interior_levels = 0;     // Fock levels compared
    double displaced_position_defect = 0.0;  // max |D^dag X D - X - shift| on interior levels
    std::vector<TermDifference> terms;       // squeeze, momentum, mass
};

// Displaces H_D by D = exp(-i r_s P), so that D^dag X D = X + r_s, and
// compares it term by term with build_naked_source on the lower half of the
// Fock levels. Terms are separated by spin component and Fock band:
// squeeze = sigma_x part on |i-j| = 2, momentum = sigma_x part on |i-j| <= 1,
// mass = sigma_z part. No equality is asserted. Throws TailTooHeavy when the
// displaced vacuum does not fit in the cutoff.
DisplacementReport displacement_equivalence_report(const ModelParams& p);

class BetaSchedule {
public:
    BetaSchedule(std::function<double(double)> beta, std::function<double(double)> beta_prime,
                 std::string description = {});

    static BetaSchedule constant(double value = 1.0);
    // 1 + amplitude * sin(frequency * t)
    static BetaSchedule sinusoidal(double amplitude, double frequency);

    double operator()(double t) const { return beta_(t); }
    double derivative(double t) const { return beta_prime_(t); }
    const std::string& description() const { return description_; }

private:
    std::function<double(double)> beta_;
    std::function<double(double)> beta_prime_;
    std::string description_;
};

// H(t) = beta(t) (1/(4 r_s)) sigma_x {X,P} + sqrt(beta(t)) (m / r_s) sigma_z X.
// The -i beta'/(2 beta) term only contributes a global phase and is dropped.
Operator build_time_dependent(const ModelParams& p, const BetaSchedule& beta, double t);

struct SidebandPlan {
    double eta = 0.0;
    double eta2 = 0.0;
    double Omega_r = 0.0;
    double Omega_b = 0.0;
    double Omega_r2 = 0.0;
    double Omega_b2 = 0.0;
};

// eta Omega_r = m / (sqrt(2) r_s) = -eta Omega_b,
// eta2^2 Omega_r2 = eta2^2 Omega_b2 = 1 / (4 r_s).
SidebandPlan sideband_plan(const ModelParams& p, double eta, double eta2);

}  // namespace cqrm
