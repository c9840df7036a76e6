#include "cqrm/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

namespace cqrm {

double massless_geodesic(double x0, double r_s, int branch, double t) {
    if (!(x0 > r_s)) {
        throw InvalidArgument("massless_geodesic: x0 must lie outside the horizon");
    }
    if (branch != 1 && branch != -1) {
        throw InvalidArgument("massless_geodesic: branch must be +1 or -1");
    }
    return r_s + (x0 - r_s) * std::exp(branch * t / r_s);
}

double geodesic_energy(double u, double du) {
    return 0.5 * du * du - u * u / 8.0 + u * u * u * u / 8.0;
}

namespace {

template <typename Accel>
std::pair<double, double> rk4_step(double q, double v, double h, Accel&& accel) {
    const double k1q = v;
    const double k1v = accel(q, v);
    const double k2q = v + 0.5 * h * k1v;
    const double k2v = accel(q + 0.5 * h * k1q, k2q);
    const double k3q = v + 0.5 * h * k2v;
    const double k3v = accel(q + 0.5 * h * k2q, k3q);
    const double k4q = v + h * k3v;
    const double k4v = accel(q + h * k3q, k4q);
    return {q + h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q),
            v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)};
}

}  // namespace

std::vector<GeodesicState> massive_geodesic(double u0, double v0, double dtau, int steps) {
    if (!(u0 > 0.0)) {
        throw InvalidArgument("massive_geodesic: u0 must be positive");
    }
    if (!(dtau > 0.0) || steps < 0) {
        throw InvalidArgument("massive_geodesic: need dtau > 0 and steps >= 0");
    }
    const auto accel = [](double u, double) { return u / 4.0 - u * u * u / 2.0; };
    const double e0 = geodesic_energy(u0, v0);
    std::vector<GeodesicState> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back({0.0, u0, v0});
    double u = u0;
    double v = v0;
    for (int k = 1; k <= steps; ++k) {
        std::tie(u, v) = rk4_step(u, v, dtau, accel);
        const double drift = std::abs(geodesic_energy(u, v) - e0);
        if (drift > 1e-6 * std::max(1.0, std::abs(e0))) {
            throw StepTooLarge("massive_geodesic: energy drift " + std::to_string(drift) +
                               " at step " + std::to_string(k) + "; reduce dtau");
        }
        out.push_back({k * dtau, u, v});
    }
    return out;
}

std::vector<GeodesicStateX> massive_geodesic_x(double y0, double dy0, double dtau, int steps) {
    if (!(y0 > 0.0)) {
        throw InvalidArgument("massive_geodesic_x: y0 must be positive (outside the horizon)");
    }
    if (!(dtau > 0.0) || steps < 0) {
        throw InvalidArgument("massive_geodesic_x: need dtau > 0 and steps >= 0");
    }
    const auto accel = [](double y, double dy) { return dy * dy / (2.0 * y) + y / 2.0 - y * y; };
    std::vector<GeodesicStateX> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back({0.0, y0, dy0});
    double y = y0;
    double dy = dy0;
    for (int k = 1; k <= steps; ++k) {
        std::tie(y, dy) = rk4_step(y, dy, dtau, accel);
        out.push_back({k * dtau, y, dy});
    }
    return out;
}

double GridSpinor::norm2() const {
    return spacing() * (up.squaredNorm() + down.squaredNorm());
}

RealVector GridSpinor::density() const {
    return up.cwiseAbs2() + down.cwiseAbs2();
}

GridSpinor gaussian_packet(double lo, double hi, int points, double X0, SpinLabel spin) {
    if (!(lo > 0.0)) {
        throw InvalidArgument("gaussian_packet: grid must be strictly positive");
    }
    GridSpinor g;
    g.X = uniform_grid(lo, hi, points);
    const auto s = spinor(spin);
    const double norm = std::pow(std::numbers::pi, -0.25);
    g.up.resize(points);
    g.down.resize(points);
    for (int i = 0; i < points; ++i) {
        const double d = g.X[i] - X0;
        const double amp = norm * std::exp(-0.5 * d * d);
        g.up[i] = s[0] * amp;
        g.down[i] = s[1] * amp;
    }
    const double scale = 1.0 / std::sqrt(g.norm2());
    g.up *= scale;
    g.down *= scale;
    return g;
}

namespace {

using Block = Eigen::Matrix2cd;

// Block-tridiagonal system (I + i dt/2 H) with 2x2 blocks, factorized once.
class CrankNicolson {
public:
    CrankNicolson(const ModelParams& params, const RealVector& X, double dt)
        : n_(X.size()), dt_(dt) {
        const double h = X[1] - X[0];
        const double mass = params.m_tilde() / params.r_s();
        const double sq = 1.0 / (4.0 * params.r_s());
        Block sx;
        sx << 0, 1, 1, 0;
        Block sz;
        sz << 1, 0, 0, -1;

        diag_.resize(n_);
        upper_.resize(n_);
        lower_.resize(n_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            diag_[j] = mass * X[j] * sz;
            // {X, P_h} = -i (X D + D X): off-diagonals -+ i (X_j + X_k) / (2h)
            upper_[j] = j + 1 < n_ ? Block(sq * Complex{0.0, -(X[j] + X[j + 1]) / (2 * h)} * sx)
                                   : Block::Zero();
            lower_[j] = j > 0 ? Block(sq * Complex{0.0, (X[j] + X[j - 1]) / (2 * h)} * sx)
                              : Block::Zero();
        }

        const Complex a{0.0, 0.5 * dt_};
        inv_pivot_.resize(n_);
        c_prime_.resize(n_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            Block pivot = Block::Identity() + a * diag_[j];
            if (j > 0) {
                pivot -= (a * lower_[j]) * c_prime_[j - 1];
            }
            inv_pivot_[j] = pivot.inverse();
            c_prime_[j] = inv_pivot_[j] * (a * upper_[j]);
        }
    }

    void step(Vector& up, Vector& down) const {
        const Complex a{0.0, 0.5 * dt_};
        std::vector<Eigen::Vector2cd> rhs(n_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            Eigen::Vector2cd psi(up[j], down[j]);
            Eigen::Vector2cd hpsi = diag_[j] * psi;
            if (j > 0) hpsi += lower_[j] * Eigen::Vector2cd(up[j - 1], down[j - 1]);
            if (j + 1 < n_) hpsi += upper_[j] * Eigen::Vector2cd(up[j + 1], down[j + 1]);
            rhs[j] = psi - a * hpsi;
        }
        // forward sweep
        std::vector<Eigen::Vector2cd> d(n_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            Eigen::Vector2cd r = rhs[j];
            if (j > 0) r -= (a * lower_[j]) * d[j - 1];
            d[j] = inv_pivot_[j] * r;
        }
        // back substitution
        for (Eigen::Index j = n_ - 1; j >= 0; --j) {
            if (j + 1 < n_) d[j] -= c_prime_[j] * d[j + 1];
            up[j] = d[j][0];
            down[j] = d[j][1];
        }
    }

private:
    Eigen::Index n_;
    double dt_;
    std::vector<Block> diag_, upper_, lower_;
    std::vector<Block> inv_pivot_, c_prime_;
};

double edge_mass(const GridSpinor& g, Eigen::Index zone) {
    const bool natural_origin = g.X[0] <= 1.5 * g.spacing();
    const double left = natural_origin ? 0.0 : g.up.head(zone).squaredNorm() + g.down.head(zone).squaredNorm();
    const double right = g.up.tail(zone).squaredNorm() + g.down.tail(zone).squaredNorm();
    return g.spacing() * std::max(left, right);
}

}  // namespace

PdeResult pde_evolve(const ModelParams& params, const GridSpinor& initial,
                     const std::vector<double>& snapshot_times, const PdeConfig& cfg) {
    const Eigen::Index n = initial.X.size();
    if (n < 8 || initial.up.size() != n || initial.down.size() != n) {
        throw InvalidArgument("pde_evolve: malformed grid spinor");
    }
    if (!(initial.X[0] > 0.0)) {
        throw InvalidArgument("pde_evolve: grid must be strictly positive");
    }
    const double h = initial.spacing();
    for (Eigen::Index i = 1; i < n; ++i) {
        if (std::abs(initial.X[i] - initial.X[i - 1] - h) > 1e-9 * h) {
            throw InvalidArgument("pde_evolve: grid must be uniform");
        }
    }
    if (!(cfg.dt_step > 0.0)) {
        throw InvalidArgument("pde_evolve: dt_step must be positive");
    }
    if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()) ||
        (!snapshot_times.empty() && snapshot_times.front() < 0.0)) {
        throw InvalidArgument("pde_evolve: snapshot times must be sorted and non-negative");
    }

    const auto zone = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(cfg.boundary_fraction * n));
    const CrankNicolson cn(params, initial.X, cfg.dt_step);
    const double norm0 = initial.norm2();

    PdeResult result;
    GridSpinor psi = initial;
    long step = 0;
    const auto check = [&](double t) {
        const double mass = edge_mass(psi, zone);
        result.max_boundary_mass = std::max(result.max_boundary_mass, mass);
        if (norm0 > 0.0 && mass > cfg.boundary_tolerance * norm0) {
            throw BoundaryMassViolation("pde_evolve: probability " + std::to_string(mass) +
                                            " reached the grid edge at t=" + std::to_string(t) +
                                            "; widen the grid",
                                        t, mass);
        }
        result.max_norm_drift = std::max(result.max_norm_drift, std::abs(psi.norm2() - norm0));
    };
    check(0.0);
    for (double target : snapshot_times) {
        const auto target_step = static_cast<long>(std::llround(target / cfg.dt_step));
        while (step < target_step) {
            cn.step(psi.up, psi.down);
            ++step;
            if (step % 16 == 0) {
                check(step * cfg.dt_step);
            }
        }
        check(step * cfg.dt_step);
        result.snapshots.push_back({step * cfg.dt_step, psi});
    }
    return result;
}

double l1_distance(const RealVector& grid, const RealVector& a, const RealVector& b) {
    if (grid.size() != a.size() || grid.size() != b.size()) {
        throw DimensionMismatch("l1_distance: size mismatch");
    }
    double sum = 0.0;
    for (Eigen::Index i = 1; i < grid.size(); ++i) {
        sum += 0.5 * (std::abs(a[i] - b[i]) + std::abs(a[i - 1] - b[i - 1])) * (grid[i] - grid[i - 1]);
    }
    return sum;
}

EhrenfestTable ehrenfest_residuals(const std::vector<MomentSample>& samples, const ModelParams& params) {
    if (samples.size() < 5) {
        throw InvalidArgument("ehrenfest_residuals: need at least five samples");
    }
    const double dt = samples[1].t - samples[0].t;
    if (!(dt > 0.0)) {
        throw InvalidArgument("ehrenfest_residuals: times must increase");
    }
    for (std::size_t k = 1; k < samples.size(); ++k) {
        if (std::abs(samples[k].t - samples[k - 1].t - dt) > 1e-9 * std::max(1.0, samples[k].t)) {
            throw InvalidArgument("ehrenfest_residuals: sampling is not uniform");
        }
    }
    const double rs = params.r_s();
    const double m = params.m_tilde();
    // <x> - r_s; differencing without the constant offset keeps the rounding
    // noise of the second difference down
    const auto x_of = [rs](const MomentSample& s) { return s.X2 / rs; };

    EhrenfestTable table;
    for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
        const auto& prev = samples[k - 1];
        const auto& cur = samples[k];
        const auto& next = samples[k + 1];
        EhrenfestRow row;
        row.t = cur.t;
        row.lhs[0] = (next.X - prev.X) / (2 * dt);
        row.lhs[1] = (next.X - 2 * cur.X + prev.X) / (dt * dt);
        row.lhs[2] = (x_of(next) - x_of(prev)) / (2 * dt);
        row.lhs[3] = (x_of(next) - 2 * x_of(cur) + x_of(prev)) / (dt * dt);

        row.residual[0] = row.lhs[0] - cur.X_sx / (2 * rs);
        row.residual[1] = row.lhs[1] - (cur.X / (4 * rs * rs) - m / (rs * rs) * cur.X2_sy);
        row.residual[2] = row.lhs[2] - cur.X2_sx / (rs * rs);
        row.residual[3] = row.lhs[3] - (x_of(cur) / (rs * rs) - 2 * m / (rs * rs * rs) * cur.X3_sy);
        for (int i = 0; i < 4; ++i) {
            table.max_residual[i] = std::max(table.max_residual[i], std::abs(row.residual[i]));
            table.max_lhs[i] = std::max(table.max_lhs[i], std::abs(row.lhs[i]));
        }
        table.rows.push_back(row);
    }
    return table;
}

ZitterbewegungMetrics zitterbewegung_metrics(const std::vector<MomentSample>& samples, double noise) {
    ZitterbewegungMetrics z;
    if (samples.empty()) {
        return z;
    }
    double slack = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        slack = std::min(slack, std::sqrt(std::max(s.X4, 0.0)) - std::abs(s.X2_sy));
    }
    z.cauchy_schwarz_slack = slack;

    // Hysteresis turning-point search: track the running extreme in the
    // current direction and confirm it once <X> retreats by more than noise.
    int direction = 0;
    std::size_t candidate = 0;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const double x = samples[k].X;
        const double c = samples[candidate].X;
        if (direction == 0) {
            if (x > c + noise) {
                direction = 1;
                candidate = k;
            } else if (x < c - noise) {
                direction = -1;
                candidate = k;
            }
            continue;
        }
        if ((direction > 0 && x > c) || (direction < 0 && x < c)) {
            candidate = k;
        } else if (std::abs(x - c) > noise) {
            z.extrema_t.push_back(samples[candidate].t);
            z.extrema_X.push_back(c);
            direction = -direction;
            candidate = k;
        }
    }
    for (std::size_t k = 1; k < z.extrema_X.size(); ++k) {
        z.half_swings.push_back(0.5 * std::abs(z.extrema_X[k] - z.extrema_X[k - 1]));
    }
    z.complete = z.extrema_X.size() >= 2;
    if (z.complete) {
        z.early_envelope = z.half_swings.front();
        z.late_envelope = z.half_swings.back();
        z.envelope_ratio = z.late_envelope / z.early_envelope;
        z.max_envelope = *std::max_element(z.half_swings.begin(), z.half_swings.end());
    }
    return z;
}

double zero_slope_check(const SpinorState& state, const ModelParams& params) {
    const ObservableSet obs(params);
    return obs.moments(state.amplitudes(), 0.0).X_sx / (2.0 * params.r_s());
}

}  // namespace cqrm
