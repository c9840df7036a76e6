#include "cqrm/evolution.hpp"

#include "cqrm/observables.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace cqrm {

Propagator::Propagator(RealVector eigenvalues, Matrix eigenvectors, int n_max)
    : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)), n_max_(n_max) {}

Propagator make_propagator(const Operator& h) {
    const double scale = std::max(1.0, max_abs(h.matrix()));
    if (h.hermiticity_defect() > 1e-12 * scale) {
        throw InvalidArgument("make_propagator: Hamiltonian '" + h.label() + "' is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("make_propagator: eigendecomposition did not converge");
    }
    return Propagator(es.eigenvalues(), es.eigenvectors(), h.n_max());
}

namespace {

Vector phase_factors(const RealVector& eigenvalues, double t) {
    Vector out(eigenvalues.size());
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
        const double phase = -eigenvalues[k] * t;
        out[k] = Complex{std::cos(phase), std::sin(phase)};
    }
    return out;
}

}  // namespace

Matrix Propagator::unitary(double t) const {
    return eigenvectors_ * phase_factors(eigenvalues_, t).asDiagonal() * eigenvectors_.adjoint();
}

Vector Propagator::apply(const Vector& psi, double t) const {
    if (psi.size() != dim()) {
        throw DimensionMismatch("Propagator::apply: state dimension mismatch");
    }
    const Vector coeffs = eigenvectors_.adjoint() * psi;
    return eigenvectors_ * phase_factors(eigenvalues_, t).cwiseProduct(coeffs);
}

double Propagator::spectral_norm() const { return eigenvalues_.cwiseAbs().maxCoeff(); }

void EvolutionConfig::validate() const {
    if (!std::isfinite(t_max) || t_max < 0.0) {
        throw InvalidArgument("EvolutionConfig: t_max must be >= 0");
    }
    if (!(dt_record > 0.0)) {
        throw InvalidArgument("EvolutionConfig: dt_record must be > 0");
    }
    if (t_max > 0.0 && dt_record > t_max * (1.0 + 1e-12)) {
        throw InvalidArgument("EvolutionConfig: dt_record must not exceed t_max");
    }
    if (!(tail_threshold > 0.0)) {
        throw InvalidArgument("EvolutionConfig: tail_threshold must be > 0");
    }
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
        throw InvalidArgument("EvolutionConfig: tail_fraction must lie in (0, 1]");
    }
}

std::vector<double> EvolutionConfig::sample_times() const {
    validate();
    const auto count = static_cast<long>(std::floor(t_max / dt_record + 1e-9));
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(count) + 1);
    for (long k = 0; k <= count; ++k) {
        times.push_back(static_cast<double>(k) * dt_record);
    }
    return times;
}

double EvolutionResult::trusted_until() const {
    double last = 0.0;
    for (const auto& s : samples) {
        if (!s.trusted) {
            break;
        }
        last = s.t;
    }
    return last;
}

namespace {

class TailMonitor {
public:
    TailMonitor(const EvolutionConfig& cfg, int n_max) : cfg_(cfg), n_max_(n_max) {}

    // Returns (tail, trusted) for the next sample.
    std::pair<double, bool> update(double t, const Vector& psi) {
        const double tail = tail_occupation(psi, n_max_, cfg_.tail_fraction);
        if (trusted_ && tail > cfg_.tail_threshold) {
            trusted_ = false;
            warning_ = TruncationWarning{t, tail};
        }
        return {tail, trusted_};
    }

    std::optional<TruncationWarning> warning() const { return warning_; }

private:
    const EvolutionConfig& cfg_;
    int n_max_;
    bool trusted_ = true;
    std::optional<TruncationWarning> warning_;
};

constexpr Eigen::Index kBlock = 128;

}  // namespace

std::optional<TruncationWarning> evolve_stream(const SpinorState& initial, const Propagator& prop,
                                               const EvolutionConfig& cfg,
                                               const SampleVisitor& visit) {
    if (initial.dim() != prop.dim()) {
        throw DimensionMismatch("evolve: state has dimension " + std::to_string(initial.dim()) +
                                ", propagator " + std::to_string(prop.dim()));
    }
    const auto times = cfg.sample_times();
    const Vector coeffs = prop.eigenvectors().adjoint() * initial.amplitudes();
    TailMonitor monitor(cfg, initial.cutoff().n_max());

    const auto total = static_cast<Eigen::Index>(times.size());
    Matrix spectral(prop.dim(), kBlock);
    Matrix states(prop.dim(), kBlock);
    for (Eigen::Index start = 0; start < total; start += kBlock) {
        const Eigen::Index count = std::min(kBlock, total - start);
        for (Eigen::Index j = 0; j < count; ++j) {
            spectral.col(j) = phase_factors(prop.eigenvalues(), times[start + j]).cwiseProduct(coeffs);
        }
        states.leftCols(count).noalias() = prop.eigenvectors() * spectral.leftCols(count);
        for (Eigen::Index j = 0; j < count; ++j) {
            const Vector psi = states.col(j);
            const double t = times[start + j];
            const auto [tail, trusted] = monitor.update(t, psi);
            visit(SampleView{t, psi, tail, trusted});
        }
    }
    return monitor.warning();
}

EvolutionResult evolve(const SpinorState& initial, const Propagator& prop,
                       const EvolutionConfig& cfg) {
    EvolutionResult result;
    const auto cutoff = initial.cutoff();
    result.warning = evolve_stream(initial, prop, cfg, [&](const SampleView& s) {
        result.samples.push_back(
            {s.t, SpinorState::with_tolerance(cutoff, s.amplitudes, 1e-10), s.tail, s.trusted});
    });
    return result;
}

Vector apply_exponential(const Eigen::SparseMatrix<Complex>& h, const Vector& psi, double dt) {
    // Induced 1-norm bounds the spectral norm of a Hermitian matrix.
    double norm1 = 0.0;
    for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
        double col = 0.0;
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(h, k); it; ++it) {
            col += std::abs(it.value());
        }
        norm1 = std::max(norm1, col);
    }
    const int substeps = std::max(1, static_cast<int>(std::ceil(2.0 * norm1 * std::abs(dt))));
    const double tau = dt / substeps;
    Vector out = psi;
    for (int s = 0; s < substeps; ++s) {
        Vector term = out;
        Vector sum = out;
        for (int k = 1; k < 60; ++k) {
            term = (Complex{0.0, -tau} / static_cast<double>(k)) * (h * term);
            sum += term;
            if (term.norm() <= 1e-17 * sum.norm()) {
                break;
            }
        }
        out = std::move(sum);
    }
    return out;
}

EvolutionResult evolve_td(const SpinorState& initial, const HamiltonianSchedule& hamiltonian,
                          const EvolutionConfig& cfg) {
    const auto times = cfg.sample_times();
    if (!(cfg.dt_step > 0.0)) {
        throw InvalidArgument("evolve_td: dt_step must be > 0");
    }
    const double ratio = cfg.dt_record / cfg.dt_step;
    const auto steps_per_record = static_cast<long>(std::llround(ratio));
    if (steps_per_record < 1 || std::abs(ratio - static_cast<double>(steps_per_record)) > 1e-9 * ratio) {
        throw InvalidArgument("evolve_td: dt_step must divide dt_record");
    }

    const auto cutoff = initial.cutoff();
    TailMonitor monitor(cfg, cutoff.n_max());
    EvolutionResult result;
    Vector psi = initial.amplitudes();
    const double step = cfg.dt_record / static_cast<double>(steps_per_record);
    for (std::size_t r = 0; r < times.size(); ++r) {
        if (r > 0) {
            for (long k = 0; k < steps_per_record; ++k) {
                const double t_mid = times[r - 1] + (static_cast<double>(k) + 0.5) * step;
                const auto h = hamiltonian(t_mid);
                if (h.dim() != psi.size()) {
                    throw DimensionMismatch("evolve_td: Hamiltonian dimension mismatch");
                }
                const Eigen::SparseMatrix<Complex> hs = h.matrix().sparseView(0.0, 0.0);
                psi = apply_exponential(hs, psi, step);
            }
        }
        const auto [tail, trusted] = monitor.update(times[r], psi);
        result.samples.push_back(
            {times[r], SpinorState::with_tolerance(cutoff, psi, 1e-8), tail, trusted});
    }
    result.warning = monitor.warning();
    return result;
}

std::vector<ConvergenceRow> convergence_scan(const RunSpec& spec, const std::vector<int>& cutoffs) {
    if (cutoffs.size() < 2) {
        throw InvalidArgument("convergence_scan: need at least two cutoffs");
    }
    if (!std::is_sorted(cutoffs.begin(), cutoffs.end())) {
        throw InvalidArgument("convergence_scan: cutoffs must be non-decreasing");
    }

    struct Series {
        std::vector<double> mean_x, var_X, var_P;
        std::vector<bool> trusted;
    };
    std::vector<Series> runs;
    for (int n : cutoffs) {
        const ModelParams params(spec.m_tilde, spec.M_tilde, FockCutoff(n));
        const auto prop = make_propagator(build_dirac_bh(params));
        const auto psi0 = product_state(spinor(spec.spin), coherent_state(params.cutoff(), spec.X0));
        const ObservableSet obs(params);
        Series s;
        evolve_stream(psi0, prop, spec.cfg, [&](const SampleView& v) {
            const auto rec = obs.record(v.amplitudes, v.t, v.tail, v.trusted);
            s.mean_x.push_back(rec.mean_x);
            s.var_X.push_back(rec.var_X);
            s.var_P.push_back(rec.var_P);
            s.trusted.push_back(v.trusted);
        });
        runs.push_back(std::move(s));
    }

    const auto times = spec.cfg.sample_times();
    std::size_t window = 0;
    while (window < times.size() && runs.front().trusted[window]) {
        ++window;
    }
    const double window_end = window > 0 ? times[window - 1] : 0.0;

    std::vector<ConvergenceRow> rows;
    for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
        const auto& lo = runs[k];
        const auto& hi = runs[k + 1];
        ConvergenceRow row{cutoffs[k], cutoffs[k + 1], window_end, 0.0, 0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < window; ++i) {
            const double dx = std::abs(lo.mean_x[i] - hi.mean_x[i]);
            row.max_abs_mean_x = std::max(row.max_abs_mean_x, dx);
            row.max_rel_mean_x = std::max(row.max_rel_mean_x, dx / std::abs(hi.mean_x[i]));
            row.max_var_X = std::max(row.max_var_X, std::abs(lo.var_X[i] - hi.var_X[i]));
            row.max_var_P = std::max(row.max_var_P, std::abs(lo.var_P[i] - hi.var_P[i]));
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace cqrm
