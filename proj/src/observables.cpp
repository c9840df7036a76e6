#include "cqrm/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cqrm {

namespace {

SparseMatrix to_sparse(const Matrix& m) { return m.sparseView(0.0, 0.0); }

}  // namespace

ObservableSet::ObservableSet(const ModelParams& params, const std::optional<Operator>& hamiltonian)
    : params_(params) {
    const auto [X, P] = build_quadratures(params.cutoff());
    X_ = to_sparse(X.matrix());
    P_ = to_sparse(P.matrix());
    if (hamiltonian) {
        if (hamiltonian->dim() != params.cutoff().composite_dim()) {
            throw DimensionMismatch("ObservableSet: Hamiltonian does not match the cutoff");
        }
        H_ = to_sparse(hamiltonian->matrix());
    } else {
        H_ = to_sparse(build_dirac_bh(params).matrix());
    }
}

double ObservableSet::energy(const Vector& psi) const {
    const Vector hpsi = H_ * psi;
    return psi.dot(hpsi).real();
}

TrajectoryRecord ObservableSet::record(const Vector& psi, double t, double tail, bool trusted) const {
    const int n = params_.cutoff().n_max();
    if (psi.size() != 2 * n) {
        throw DimensionMismatch("record: state dimension does not match the cutoff");
    }
    const auto up = psi.head(n);
    const auto dn = psi.tail(n);
    const Vector xu = X_ * up;
    const Vector xd = X_ * dn;
    const Vector pu = P_ * up;
    const Vector pd = P_ * dn;

    TrajectoryRecord r;
    r.t = t;
    r.norm = psi.norm();
    r.mean_X = (up.dot(xu) + dn.dot(xd)).real();
    r.mean_X2 = xu.squaredNorm() + xd.squaredNorm();
    const double mean_P = (up.dot(pu) + dn.dot(pd)).real();
    const double mean_P2 = pu.squaredNorm() + pd.squaredNorm();
    r.mean_x = r.mean_X2 / params_.r_s() + params_.r_s();
    r.var_X = r.mean_X2 - r.mean_X * r.mean_X;
    r.var_P = mean_P2 - mean_P * mean_P;
    // <(XP + PX)/2> = Re <X psi | P psi>
    r.cov_XP = (xu.dot(pu) + xd.dot(pd)).real() - r.mean_X * mean_P;
    const Complex ud = up.dot(dn);
    r.sx = 2.0 * ud.real();
    r.sy = 2.0 * ud.imag();
    r.sz = up.squaredNorm() - dn.squaredNorm();
    r.energy = energy(psi);
    r.tail = tail;
    r.trusted = trusted;
    return r;
}

TrajectoryRecord ObservableSet::record(const SpinorState& state, double t) const {
    return record(state.amplitudes(), t, tail_occupation(state), true);
}

MomentSample ObservableSet::moments(const Vector& psi, double t) const {
    const int n = params_.cutoff().n_max();
    if (psi.size() != 2 * n) {
        throw DimensionMismatch("moments: state dimension does not match the cutoff");
    }
    const auto up = psi.head(n);
    const auto dn = psi.tail(n);
    const Vector xu = X_ * up;
    const Vector xd = X_ * dn;
    const Vector x2u = X_ * xu;
    const Vector x2d = X_ * xd;

    MomentSample m;
    m.t = t;
    m.X = (up.dot(xu) + dn.dot(xd)).real();
    m.X2 = xu.squaredNorm() + xd.squaredNorm();
    m.X4 = x2u.squaredNorm() + x2d.squaredNorm();
    // <sigma_x (x) B> = 2 Re <u|B|d>, <sigma_y (x) B> = 2 Im <u|B|d>
    m.X_sx = 2.0 * up.dot(xd).real();
    m.X2_sx = 2.0 * xu.dot(xd).real();
    m.X2_sy = 2.0 * xu.dot(xd).imag();
    m.X3_sy = 2.0 * xu.dot(x2d).imag();
    return m;
}

Complex expectation(const Operator& op, const SpinorState& state) {
    if (op.dim() != state.dim()) {
        throw DimensionMismatch("expectation: operator is " + std::to_string(op.dim()) +
                                "-dimensional, state is " + std::to_string(state.dim()));
    }
    return state.amplitudes().dot(op.matrix() * state.amplitudes());
}

TrajectoryRecord record(const SpinorState& state, const ModelParams& params, double t) {
    return ObservableSet(params).record(state, t);
}

double DensityProfile::captured() const {
    double sum = 0.0;
    for (Eigen::Index i = 1; i < grid.size(); ++i) {
        sum += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
    }
    return sum;
}

namespace {

constexpr double kRescaleAbove = 1e150;

// Calls sink(n, value, log_scale) for psi_n(X) = value * exp(log_scale).
template <typename Sink>
void hermite_recurrence(int n, double X, Sink&& sink) {
    double log_scale = -0.5 * X * X - 0.25 * std::log(std::numbers::pi);
    double prev = 0.0;
    double cur = 1.0;
    for (int k = 0; k < n; ++k) {
        sink(k, cur, log_scale);
        const double next = std::sqrt(2.0 / (k + 1)) * X * cur - std::sqrt(double(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
        const double mag = std::max(std::abs(cur), std::abs(prev));
        if (mag > kRescaleAbove) {
            prev /= mag;
            cur /= mag;
            log_scale += std::log(mag);
        }
    }
}

void require_increasing(const RealVector& grid, const char* what) {
    for (Eigen::Index i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw InvalidArgument(std::string(what) + ": grid must be strictly increasing");
        }
    }
}

// sum_s |sum_n c_{s,n} psi_n(X)|^2 at one point.
double point_density(const Vector& amps, int n, double X) {
    Complex up{0.0};
    Complex dn{0.0};
    double scale_of_sums = 0.0;
    bool started = false;
    hermite_recurrence(n, X, [&](int k, double value, double log_scale) {
        if (!started) {
            scale_of_sums = log_scale;
            started = true;
        } else if (log_scale != scale_of_sums) {
            const double f = std::exp(scale_of_sums - log_scale);
            up *= f;
            dn *= f;
            scale_of_sums = log_scale;
        }
        up += amps[k] * value;
        dn += amps[n + k] * value;
    });
    const double w = std::exp(2.0 * scale_of_sums);
    return (std::norm(up) + std::norm(dn)) * w;
}

}  // namespace

RealVector hermite_functions(int n, double X) {
    RealVector out(n);
    hermite_recurrence(n, X, [&](int k, double value, double log_scale) {
        out[k] = value * std::exp(log_scale);
    });
    return out;
}

DensityProfile density_X(const SpinorState& state, const RealVector& grid) {
    require_increasing(grid, "density_X");
    const int n = state.cutoff().n_max();
    DensityProfile p;
    p.coordinate = Coordinate::IonX;
    p.grid = grid;
    p.density.resize(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        p.density[i] = point_density(state.amplitudes(), n, grid[i]);
    }
    return p;
}

DensityProfile density_x(const SpinorState& state, const ModelParams& params,
                         const RealVector& grid_x) {
    require_increasing(grid_x, "density_x");
    const double rs = params.r_s();
    if (grid_x.size() > 0 && !(grid_x[0] > rs)) {
        throw InvalidArgument("density_x: grid point " + std::to_string(grid_x[0]) +
                              " is not outside the horizon r_s=" + std::to_string(rs));
    }
    const int n = state.cutoff().n_max();
    DensityProfile p;
    p.coordinate = Coordinate::ParticleX;
    p.grid = grid_x;
    p.density.resize(grid_x.size());
    for (Eigen::Index i = 0; i < grid_x.size(); ++i) {
        const double X = rs * std::sqrt(grid_x[i] / rs - 1.0);
        p.density[i] = point_density(state.amplitudes(), n, X) * rs / (2.0 * X);
    }
    return p;
}

RealVector uniform_grid(double lo, double hi, int points) {
    if (points < 2 || !(hi > lo)) {
        throw InvalidArgument("uniform_grid: need hi > lo and at least two points");
    }
    RealVector g(points);
    const double h = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
        g[i] = lo + h * i;
    }
    g[points - 1] = hi;
    return g;
}

RealVector default_X_grid(const TrajectoryRecord& rec, int points) {
    const double x_max = rec.mean_X + 6.0 * std::sqrt(std::max(rec.var_X, 0.0));
    return uniform_grid(-5.0, std::max(x_max, 0.0) + 5.0, points);
}

RealVector default_x_grid(const TrajectoryRecord& rec, const ModelParams& params, int points) {
    return uniform_grid(params.r_s() + 1e-3, rec.mean_x + 10.0, points);
}

double negative_side_leakage(const SpinorState& state) {
    const int n = state.cutoff().n_max();
    const double L = std::sqrt(2.0 * n + 1.0) + 10.0;
    const int intervals = 4096;
    const double h = L / intervals;
    double sum = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * point_density(state.amplitudes(), n, -L + h * i);
    }
    return sum * h / 3.0;
}

int count_fringes(const DensityProfile& profile, double depth, double floor_fraction) {
    const auto& rho = profile.density;
    const Eigen::Index n = rho.size();
    if (n < 3) {
        return 0;
    }
    const double floor = floor_fraction * rho.maxCoeff();
    std::vector<Eigen::Index> peaks;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        if (rho[i] > rho[i - 1] && rho[i] >= rho[i + 1] && rho[i] >= floor) {
            peaks.push_back(i);
        }
    }
    if (peaks.empty()) {
        return 0;
    }
    int fringes = 1;
    Eigen::Index group_peak = peaks.front();
    for (std::size_t k = 1; k < peaks.size(); ++k) {
        const Eigen::Index next = peaks[k];
        const double valley = rho.segment(group_peak, next - group_peak + 1).minCoeff();
        if (valley < depth * std::min(rho[group_peak], rho[next])) {
            ++fringes;
            group_peak = next;
        } else if (rho[next] > rho[group_peak]) {
            group_peak = next;
        }
    }
    return fringes;
}

}  // namespace cqrm
