#include "cqrm/hilbert.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace cqrm {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

FockCutoff::FockCutoff(int n_max) : n_max_(n_max) {
    if (n_max < 2) {
        throw InvalidArgument("FockCutoff: n_max must be >= 2, got " + std::to_string(n_max));
    }
}

namespace {

Eigen::Index expected_dim(Space space, int n_max) {
    switch (space) {
    case Space::Spin: return 2;
    case Space::Boson: return n_max;
    case Space::Composite: return 2 * Eigen::Index{n_max};
    }
    return 0;
}

void require_same_space(const Operator& a, const Operator& b, const char* what) {
    if (a.space() != b.space() || a.dim() != b.dim()) {
        throw DimensionMismatch(std::string(what) + ": operand dimensions differ (" +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
    }
}

}  // namespace

Operator::Operator(Space space, int n_max, Matrix entries, std::string label)
    : space_(space), n_max_(n_max), entries_(std::move(entries)), label_(std::move(label)) {
    const auto d = expected_dim(space, n_max);
    if (entries_.rows() != d || entries_.cols() != d) {
        throw DimensionMismatch("Operator '" + label_ + "': expected " + std::to_string(d) + "x" +
                                std::to_string(d) + " entries");
    }
    if (!entries_.allFinite()) {
        throw InvalidArgument("Operator '" + label_ + "': non-finite entry");
    }
}

Operator Operator::zero(Space space, int n_max, std::string label) {
    const auto d = expected_dim(space, n_max);
    return Operator(space, n_max, Matrix::Zero(d, d), std::move(label));
}

Operator Operator::identity(Space space, int n_max, std::string label) {
    const auto d = expected_dim(space, n_max);
    return Operator(space, n_max, Matrix::Identity(d, d), std::move(label));
}

Operator Operator::adjoint() const {
    return Operator(space_, n_max_, entries_.adjoint(), label_ + "^dag");
}

double Operator::hermiticity_defect() const { return max_abs(entries_ - entries_.adjoint()); }

bool Operator::is_hermitian(double tol) const { return hermiticity_defect() <= tol; }

Operator& Operator::operator+=(const Operator& rhs) {
    require_same_space(*this, rhs, "operator+");
    entries_ += rhs.entries_;
    return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
    require_same_space(*this, rhs, "operator-");
    entries_ -= rhs.entries_;
    return *this;
}

Operator& Operator::operator*=(Complex s) {
    entries_ *= s;
    return *this;
}

Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }

Operator operator*(const Operator& lhs, const Operator& rhs) {
    require_same_space(lhs, rhs, "operator*");
    return Operator(lhs.space(), lhs.n_max(), lhs.matrix() * rhs.matrix(),
                    lhs.label() + "*" + rhs.label());
}

Operator operator*(Complex s, Operator op) { return op *= s; }
Operator operator*(double s, Operator op) { return op *= Complex{s, 0.0}; }

Operator commutator(const Operator& a, const Operator& b) {
    require_same_space(a, b, "commutator");
    const Matrix ab = a.matrix() * b.matrix();
    const Matrix ba = b.matrix() * a.matrix();
    return Operator(a.space(), a.n_max(), ab - ba, "[" + a.label() + "," + b.label() + "]");
}

Operator anticommutator(const Operator& a, const Operator& b) {
    require_same_space(a, b, "anticommutator");
    const Matrix ab = a.matrix() * b.matrix();
    const Matrix ba = b.matrix() * a.matrix();
    return Operator(a.space(), a.n_max(), ab + ba, "{" + a.label() + "," + b.label() + "}");
}

Operator tensor(const Operator& spin, const Operator& boson) {
    if (spin.space() != Space::Spin) {
        throw DimensionMismatch("tensor: first factor must be a 2x2 spin operator");
    }
    if (boson.space() != Space::Boson) {
        throw DimensionMismatch("tensor: second factor must be a boson operator");
    }
    const auto n = boson.dim();
    Matrix out(2 * n, 2 * n);
    for (int s = 0; s < 2; ++s) {
        for (int r = 0; r < 2; ++r) {
            out.block(s * n, r * n, n, n) = spin.matrix()(s, r) * boson.matrix();
        }
    }
    return Operator(Space::Composite, boson.n_max(), std::move(out),
                    spin.label() + "(x)" + boson.label());
}

Ladder build_ladder(FockCutoff cutoff) {
    const int n = cutoff.n_max();
    Matrix a = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        a(k - 1, k) = std::sqrt(static_cast<double>(k));
    }
    Matrix a_dag = a.adjoint();
    return {Operator(Space::Boson, n, std::move(a), "a"),
            Operator(Space::Boson, n, std::move(a_dag), "a^dag")};
}

Quadratures build_quadratures(FockCutoff cutoff) {
    const auto [a, a_dag] = build_ladder(cutoff);
    const double r = 1.0 / std::numbers::sqrt2;
    Matrix X = r * (a.matrix() + a_dag.matrix());
    Matrix P = (r / kI) * (a.matrix() - a_dag.matrix());
    return {Operator(Space::Boson, cutoff.n_max(), std::move(X), "X"),
            Operator(Space::Boson, cutoff.n_max(), std::move(P), "P")};
}

Operator squeeze_generator(FockCutoff cutoff) {
    // (a^2)_{k,k+2} = sqrt(k+1) sqrt(k+2), the same entries as the truncated product a a
    const int n = cutoff.n_max();
    Matrix s = Matrix::Zero(n, n);
    for (int k = 0; k + 2 < n; ++k) {
        const double v = std::sqrt(static_cast<double>(k + 1)) * std::sqrt(static_cast<double>(k + 2));
        s(k, k + 2) = Complex(0.0, -v);
        s(k + 2, k) = Complex(0.0, v);
    }
    return Operator(Space::Boson, n, std::move(s), "{X,P}");
}

Operator pauli(Pauli which) {
    Matrix m = Matrix::Zero(2, 2);
    std::string label;
    switch (which) {
    case Pauli::I:
        m = Matrix::Identity(2, 2);
        label = "I2";
        break;
    case Pauli::X:
        m(0, 1) = 1.0;
        m(1, 0) = 1.0;
        label = "sx";
        break;
    case Pauli::Y:
        m(0, 1) = -kI;
        m(1, 0) = kI;
        label = "sy";
        break;
    case Pauli::Z:
        m(0, 0) = 1.0;
        m(1, 1) = -1.0;
        label = "sz";
        break;
    }
    return Operator(Space::Spin, 2, std::move(m), std::move(label));
}

double interior_max_abs_diff(const Operator& a, const Operator& b, int exclude_top) {
    require_same_space(a, b, "interior_max_abs_diff");
    const Matrix d = a.matrix() - b.matrix();
    if (a.space() == Space::Spin) {
        return max_abs(d);
    }
    const int n = a.n_max();
    const int keep = std::max(0, n - exclude_top);
    if (a.space() == Space::Boson) {
        return max_abs(d.topLeftCorner(keep, keep));
    }
    double worst = 0.0;
    for (int s = 0; s < 2; ++s) {
        for (int r = 0; r < 2; ++r) {
            worst = std::max(worst, max_abs(d.block(s * n, r * n, keep, keep)));
        }
    }
    return worst;
}

namespace {

double log_poisson(double mean, int n) {
    if (mean == 0.0) {
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    return -mean + n * std::log(mean) - std::lgamma(n + 1.0);
}

}  // namespace

double coherent_tail_probability(FockCutoff cutoff, double X0) {
    const double mean = 0.5 * X0 * X0;
    double tail = 0.0;
    // Terms beyond the mode decrease monotonically; stop once negligible.
    for (int n = cutoff.n_max();; ++n) {
        const double term = std::exp(log_poisson(mean, n));
        tail += term;
        if (n > mean && (term < 1e-30 || term < 1e-18 * tail)) {
            break;
        }
    }
    return tail;
}

BosonState coherent_state(FockCutoff cutoff, double X0, double max_discarded) {
    if (!std::isfinite(X0)) {
        throw InvalidArgument("coherent_state: X0 must be finite");
    }
    const double discarded = coherent_tail_probability(cutoff, X0);
    if (discarded > max_discarded) {
        throw TailTooHeavy("coherent_state: displacement X0=" + std::to_string(X0) +
                               " discards probability " + std::to_string(discarded) +
                               " above n_max=" + std::to_string(cutoff.n_max()),
                           discarded);
    }
    const double alpha = X0 / std::numbers::sqrt2;
    const double mean = alpha * alpha;
    BosonState c = BosonState::Zero(cutoff.n_max());
    for (int n = 0; n < cutoff.n_max(); ++n) {
        const double mag = std::exp(0.5 * log_poisson(mean, n));
        c[n] = (alpha < 0 && n % 2 == 1) ? -mag : mag;
    }
    c /= c.norm();
    return c;
}

BosonState fock_state(FockCutoff cutoff, int n) {
    if (n < 0 || n >= cutoff.n_max()) {
        throw InvalidArgument("fock_state: level " + std::to_string(n) + " outside cutoff");
    }
    BosonState c = BosonState::Zero(cutoff.n_max());
    c[n] = 1.0;
    return c;
}

SpinLabel parse_spin_label(std::string_view name) {
    if (name == "plus_x") return SpinLabel::PlusX;
    if (name == "minus_x") return SpinLabel::MinusX;
    if (name == "plus_y") return SpinLabel::PlusY;
    if (name == "minus_y") return SpinLabel::MinusY;
    if (name == "plus_z") return SpinLabel::PlusZ;
    if (name == "minus_z") return SpinLabel::MinusZ;
    throw InvalidArgument("unknown spin label '" + std::string(name) + "'");
}

std::string_view to_string(SpinLabel label) {
    switch (label) {
    case SpinLabel::PlusX: return "plus_x";
    case SpinLabel::MinusX: return "minus_x";
    case SpinLabel::PlusY: return "plus_y";
    case SpinLabel::MinusY: return "minus_y";
    case SpinLabel::PlusZ: return "plus_z";
    case SpinLabel::MinusZ: return "minus_z";
    }
    return "?";
}

std::array<Complex, 2> spinor(SpinLabel label) {
    const double r = 1.0 / std::numbers::sqrt2;
    switch (label) {
    case SpinLabel::PlusX: return {Complex{r}, Complex{r}};
    case SpinLabel::MinusX: return {Complex{r}, Complex{-r}};
    case SpinLabel::PlusY: return {Complex{r}, kI * r};
    case SpinLabel::MinusY: return {Complex{r}, -kI * r};
    case SpinLabel::PlusZ: return {Complex{1.0}, Complex{0.0}};
    case SpinLabel::MinusZ: return {Complex{0.0}, Complex{1.0}};
    }
    throw InvalidArgument("spinor: unknown label");
}

SpinorState::SpinorState(FockCutoff cutoff, Vector amplitudes)
    : SpinorState(cutoff, std::move(amplitudes), 1e-12) {}

SpinorState SpinorState::with_tolerance(FockCutoff cutoff, Vector amplitudes, double norm_tol) {
    return SpinorState(cutoff, std::move(amplitudes), norm_tol);
}

SpinorState::SpinorState(FockCutoff cutoff, Vector amplitudes, double norm_tol)
    : cutoff_(cutoff), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != cutoff_.composite_dim()) {
        throw DimensionMismatch("SpinorState: expected " + std::to_string(cutoff_.composite_dim()) +
                                " amplitudes, got " + std::to_string(amplitudes_.size()));
    }
    const double nrm = amplitudes_.norm();
    if (!std::isfinite(nrm) || std::abs(nrm - 1.0) > norm_tol) {
        throw InvalidArgument("SpinorState: norm " + std::to_string(nrm) + " is not 1");
    }
}

SpinorState product_state(const std::array<Complex, 2>& spin, const BosonState& boson) {
    const FockCutoff cutoff(static_cast<int>(boson.size()));
    const double bn = boson.norm();
    const double sn = std::sqrt(std::norm(spin[0]) + std::norm(spin[1]));
    if (bn == 0.0 || sn == 0.0) {
        throw InvalidArgument("product_state: zero factor");
    }
    Vector amps(cutoff.composite_dim());
    amps.head(cutoff.n_max()) = (spin[0] / sn) * boson / bn;
    amps.tail(cutoff.n_max()) = (spin[1] / sn) * boson / bn;
    return SpinorState(cutoff, std::move(amps));
}

double tail_occupation(const Vector& amplitudes, int n_max, double fraction) {
    const int top = std::max(1, static_cast<int>(std::ceil(fraction * n_max - 1e-9)));
    return amplitudes.segment(n_max - top, top).squaredNorm() +
           amplitudes.segment(2 * n_max - top, top).squaredNorm();
}

double tail_occupation(const SpinorState& state, double fraction) {
    return tail_occupation(state.amplitudes(), state.cutoff().n_max(), fraction);
}

}  // namespace cqrm
