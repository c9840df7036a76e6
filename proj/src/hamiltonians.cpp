#include "cqrm/hamiltonians.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace cqrm {

ModelParams::ModelParams(double m_tilde, double M_tilde, FockCutoff cutoff)
    : m_tilde_(m_tilde), M_tilde_(M_tilde), r_s_(0.0), cutoff_(cutoff) {
    if (!std::isfinite(m_tilde) || m_tilde < 0.0) {
        throw InvalidArgument("ModelParams: m_tilde must be finite and >= 0");
    }
    if (!std::isfinite(M_tilde) || M_tilde <= 0.0) {
        throw InvalidArgument("ModelParams: M_tilde must be finite and > 0");
    }
    r_s_ = 1.0 / (2.0 * M_tilde);
}

Operator build_qrm(const QrmParams& q, FockCutoff cutoff) {
    const int n = cutoff.n_max();
    const auto [a, a_dag] = build_ladder(cutoff);
    const auto id = Operator::identity(Space::Boson, n, "I");
    const auto number = a_dag * a;
    const auto field = a + a_dag;
    const auto field2 = a * a + a_dag * a_dag;

    auto h = q.omega * tensor(pauli(Pauli::I), number);
    h += (0.5 * q.omega0) * tensor(pauli(Pauli::Z), id);
    h += q.g * tensor(pauli(Pauli::X), field);
    h += q.kappa * tensor(pauli(Pauli::X), field2);
    return Operator(Space::Composite, n, h.matrix(), "H_qrm");
}

namespace {

Operator assemble_dirac_bh(const ModelParams& p, const Operator& squeeze, Pauli mass_axis,
                           double squeeze_scale, double mass_scale, std::string label) {
    const auto [X, P] = build_quadratures(p.cutoff());
    auto h = (squeeze_scale / (4.0 * p.r_s())) * tensor(pauli(Pauli::X), squeeze);
    h += (mass_scale * p.m_tilde() / p.r_s()) * tensor(pauli(mass_axis), X);
    return Operator(Space::Composite, p.cutoff().n_max(), h.matrix(), std::move(label));
}

}  // namespace

Operator build_dirac_bh(const ModelParams& p) {
    return assemble_dirac_bh(p, squeeze_generator(p.cutoff()), Pauli::Z, 1.0, 1.0, "H_D");
}

Operator build_dirac_bh_from_quadratures(const ModelParams& p) {
    const auto [X, P] = build_quadratures(p.cutoff());
    return assemble_dirac_bh(p, anticommutator(X, P), Pauli::Z, 1.0, 1.0, "H_D");
}

Operator build_dirac_bh_iontrap(const ModelParams& p) {
    return assemble_dirac_bh(p, squeeze_generator(p.cutoff()), Pauli::Y, 1.0, 1.0, "H_ion");
}

Operator iontrap_rotation(FockCutoff cutoff) {
    // exp(-i sigma_x pi/4) = (I - i sigma_x)/sqrt(2)
    const auto r = (1.0 / std::numbers::sqrt2) * (pauli(Pauli::I) - kI * pauli(Pauli::X));
    return tensor(r, Operator::identity(Space::Boson, cutoff.n_max(), "I"));
}

Operator build_naked_source(const ModelParams& p) {
    const int n = p.cutoff().n_max();
    const auto [X, P] = build_quadratures(p.cutoff());
    const auto id = Operator::identity(Space::Boson, n, "I");
    const double M = p.M_tilde();

    auto h = tensor(pauli(Pauli::X), P);
    h += (M / 4.0) * tensor(pauli(Pauli::X), squeeze_generator(p.cutoff()));
    h += p.m_tilde() * tensor(pauli(Pauli::Z), id + M * X);
    return Operator(Space::Composite, n, h.matrix(), "H_naked");
}

Operator build_flat_dirac(const ModelParams& p) {
    const int n = p.cutoff().n_max();
    const auto [X, P] = build_quadratures(p.cutoff());
    auto h = tensor(pauli(Pauli::X), P);
    h += p.m_tilde() * tensor(pauli(Pauli::Z), Operator::identity(Space::Boson, n));
    return Operator(Space::Composite, n, h.matrix(), "H_flat");
}

namespace {

// Boson-space component B_k of A = sum_k sigma_k (x) B_k.
Matrix spin_component(const Matrix& a, int n, Pauli which) {
    const auto b00 = a.block(0, 0, n, n);
    const auto b01 = a.block(0, n, n, n);
    const auto b10 = a.block(n, 0, n, n);
    const auto b11 = a.block(n, n, n, n);
    switch (which) {
    case Pauli::I: return 0.5 * (b00 + b11);
    case Pauli::X: return 0.5 * (b01 + b10);
    case Pauli::Y: return 0.5 * kI * (b01 - b10);
    case Pauli::Z: return 0.5 * (b00 - b11);
    }
    return {};
}

Matrix band(const Matrix& m, int lo, int hi) {
    Matrix out = Matrix::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const auto d = std::abs(i - j);
            if (d >= lo && d <= hi) {
                out(i, j) = m(i, j);
            }
        }
    }
    return out;
}

TermDifference compare_term(std::string name, const Matrix& displaced, const Matrix& naked) {
    TermDifference t;
    t.term = std::move(name);
    const Matrix d = displaced - naked;
    t.max_abs_diff = max_abs(d);
    t.frobenius_diff = d.norm();
    t.frobenius_reference = naked.norm();
    t.relative = t.frobenius_reference > 0.0 ? t.frobenius_diff / t.frobenius_reference
                                             : std::numeric_limits<double>::infinity();
    return t;
}

}  // namespace

DisplacementReport displacement_equivalence_report(const ModelParams& p) {
    const auto cutoff = p.cutoff();
    const int n = cutoff.n_max();
    const double shift = p.r_s();

    DisplacementReport report;
    report.displacement = shift;
    report.discarded_probability = coherent_tail_probability(cutoff, shift);
    if (report.discarded_probability > 1e-10) {
        throw TailTooHeavy("displacement_equivalence_report: shift r_s=" + std::to_string(shift) +
                               " does not fit in n_max=" + std::to_string(n),
                           report.discarded_probability);
    }

    const auto [X, P] = build_quadratures(cutoff);
    Eigen::SelfAdjointEigenSolver<Matrix> es(P.matrix());
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("displacement_equivalence_report: diagonalization of P failed");
    }
    const Eigen::VectorXcd phases =
        (es.eigenvalues().cast<Complex>() * Complex{0.0, -shift}).array().exp().matrix();
    const Matrix d_boson = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    const auto D = tensor(pauli(Pauli::I), Operator(Space::Boson, n, d_boson, "D"));

    const int keep = n / 2;
    report.interior_levels = keep;
    const Matrix dxd = d_boson.adjoint() * X.matrix() * d_boson;
    report.displaced_position_defect =
        max_abs((dxd - X.matrix() - shift * Matrix::Identity(n, n)).topLeftCorner(keep, keep));

    const Matrix displaced = D.matrix().adjoint() * build_dirac_bh(p).matrix() * D.matrix();
    const Matrix naked = build_naked_source(p).matrix();

    const auto interior = [keep](const Matrix& m) -> Matrix { return m.topLeftCorner(keep, keep); };
    const Matrix dx = interior(spin_component(displaced, n, Pauli::X));
    const Matrix nx = interior(spin_component(naked, n, Pauli::X));
    const Matrix dz = interior(spin_component(displaced, n, Pauli::Z));
    const Matrix nz = interior(spin_component(naked, n, Pauli::Z));

    report.terms.push_back(compare_term("squeeze", band(dx, 2, 2), band(nx, 2, 2)));
    report.terms.push_back(compare_term("momentum", band(dx, 0, 1), band(nx, 0, 1)));
    report.terms.push_back(compare_term("mass", dz, nz));
    return report;
}

BetaSchedule::BetaSchedule(std::function<double(double)> beta,
                           std::function<double(double)> beta_prime, std::string description)
    : beta_(std::move(beta)), beta_prime_(std::move(beta_prime)),
      description_(std::move(description)) {}

BetaSchedule BetaSchedule::constant(double value) {
    return BetaSchedule([value](double) { return value; }, [](double) { return 0.0; },
                        "constant " + std::to_string(value));
}

BetaSchedule BetaSchedule::sinusoidal(double amplitude, double frequency) {
    return BetaSchedule(
        [=](double t) { return 1.0 + amplitude * std::sin(frequency * t); },
        [=](double t) { return amplitude * frequency * std::cos(frequency * t); },
        "1 + " + std::to_string(amplitude) + " sin(" + std::to_string(frequency) + " t)");
}

Operator build_time_dependent(const ModelParams& p, const BetaSchedule& beta, double t) {
    const double b = beta(t);
    if (!(b > 0.0) || !std::isfinite(b)) {
        throw InvalidArgument("build_time_dependent: beta(" + std::to_string(t) +
                              ") = " + std::to_string(b) + " is not positive");
    }
    return assemble_dirac_bh(p, squeeze_generator(p.cutoff()), Pauli::Z, b, std::sqrt(b),
                             "H_D(t)");
}

SidebandPlan sideband_plan(const ModelParams& p, double eta, double eta2) {
    if (!(eta > 0.0) || !(eta2 > 0.0)) {
        throw InvalidArgument("sideband_plan: Lamb-Dicke parameters must be positive");
    }
    SidebandPlan plan;
    plan.eta = eta;
    plan.eta2 = eta2;
    plan.Omega_r = p.m_tilde() / (std::numbers::sqrt2 * p.r_s() * eta);
    plan.Omega_b = -plan.Omega_r;
    plan.Omega_r2 = 1.0 / (4.0 * p.r_s() * eta2 * eta2);
    plan.Omega_b2 = plan.Omega_r2;
    return plan;
}

}  // namespace cqrm
