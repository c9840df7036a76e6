#pragma once

// Truncated spin (x) Fock space.
//
// Composite vectors and operators use spin-major ordering: index
// s * n_max + n, with s = 0 for spin up (sigma_z = +1) and s = 1 for spin
// down. Every module relies on this layout.
//
// Operators are the infinite matrices cut at n_max levels with no boundary
// correction, so canonical relations fail on the top Fock levels.

#include "cqrm/core.hpp"

#include <array>
#include <string>
#include <string_view>

namespace cqrm {

class FockCutoff {
public:
    explicit FockCutoff(int n_max);

    int n_max() const { return n_max_; }
    int composite_dim() const { return 2 * n_max_; }

    bool operator==(const FockCutoff&) const = default;

private:
    int n_max_;
};

enum class Space { Spin, Boson, Composite };

class Operator {
public:
    Operator(Space space, int n_max, Matrix entries, std::string label = {});

    static Operator zero(Space space, int n_max, std::string label = {});
    static Operator identity(Space space, int n_max, std::string label = {});

    Space space() const { return space_; }
    int n_max() const { return n_max_; }
    Eigen::Index dim() const { return entries_.rows(); }
    const Matrix& matrix() const { return entries_; }
    const std::string& label() const { return label_; }

    Operator adjoint() const;
    bool is_hermitian(double tol) const;
    // max |A - A^dagger|
    double hermiticity_defect() const;

    Operator& operator+=(const Operator& rhs);
    Operator& operator-=(const Operator& rhs);
    Operator& operator*=(Complex s);

private:
    Space space_;
    int n_max_;
    Matrix entries_;
    std::string label_;
};

Operator operator+(Operator lhs, const Operator& rhs);
Operator operator-(Operator lhs, const Operator& rhs);
Operator operator*(const Operator& lhs, const Operator& rhs);
Operator operator*(Complex s, Operator op);
Operator operator*(double s, Operator op);

Operator commutator(const Operator& a, const Operator& b);
// AB + BA
Operator anticommutator(const Operator& a, const Operator& b);

// Kronecker product spin (x) boson with spin-major ordering.
Operator tensor(const Operator& spin, const Operator& boson);

struct Ladder {
    Operator a;
    Operator a_dag;
};

struct Quadratures {
    Operator X;
    Operator P;
};

Ladder build_ladder(FockCutoff cutoff);

// X = (a + a^dagger)/sqrt(2), P = (a - a^dagger)/(i sqrt(2)).
Quadratures build_quadratures(FockCutoff cutoff);

// {X, P} assembled as (1/i)(a^2 - a^dagger^2); agrees with
// anticommutator(X, P) away from the truncation edge.
Operator squeeze_generator(FockCutoff cutoff);

enum class Pauli { I, X, Y, Z };
Operator pauli(Pauli which);

// Max |entry| of (A - B) restricted to Fock levels [0, n_max - exclude_top)
// in every spin block. Boson-only operators are compared directly.
double interior_max_abs_diff(const Operator& a, const Operator& b, int exclude_top);

using BosonState = Vector;

// Probability a Poisson(|alpha|^2) distribution places on n >= n_max.
double coherent_tail_probability(FockCutoff cutoff, double X0);

// Coherent state with real displacement alpha = X0/sqrt(2): <X> = X0 and the
// vacuum width 1/sqrt(2). Throws TailTooHeavy when more than max_discarded of
// the untruncated probability lies above the cutoff.
BosonState coherent_state(FockCutoff cutoff, double X0, double max_discarded = 1e-10);

BosonState fock_state(FockCutoff cutoff, int n);

enum class SpinLabel { PlusX, MinusX, PlusY, MinusY, PlusZ, MinusZ };

SpinLabel parse_spin_label(std::string_view name);
std::string_view to_string(SpinLabel label);

// Normalized eigenvector of the named Pauli operator.
std::array<Complex, 2> spinor(SpinLabel label);

class SpinorState {
public:
    // Throws InvalidArgument if the norm differs from 1 by more than 1e-12.
    SpinorState(FockCutoff cutoff, Vector amplitudes);

    // Same checks but with a caller-chosen tolerance; used for evolved states.
    static SpinorState with_tolerance(FockCutoff cutoff, Vector amplitudes, double norm_tol);

    FockCutoff cutoff() const { return cutoff_; }
    Eigen::Index dim() const { return amplitudes_.size(); }
    const Vector& amplitudes() const { return amplitudes_; }
    double norm() const { return amplitudes_.norm(); }

    Complex amplitude(int spin, int n) const { return amplitudes_[spin * cutoff_.n_max() + n]; }

private:
    SpinorState(FockCutoff cutoff, Vector amplitudes, double norm_tol);

    FockCutoff cutoff_;
    Vector amplitudes_;
};

// |chi> (x) |phi>; the boson part is normalized before the product.
SpinorState product_state(const std::array<Complex, 2>& spin, const BosonState& boson);

// Probability on Fock levels n >= n_max - ceil(fraction * n_max), summed over spin.
double tail_occupation(const SpinorState& state, double fraction = 0.05);
double tail_occupation(const Vector& amplitudes, int n_max, double fraction = 0.05);

}  // namespace cqrm
