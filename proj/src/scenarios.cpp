#include "cqrm/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace cqrm {

using nlohmann::json;

namespace {

const std::vector<ScenarioInfo> kScenarios{
    {"fig1_massive", "massive particle falling toward the horizon: trajectory, Zitterbewegung, fringes"},
    {"fig2_squeezing", "position and momentum variances of the massive run"},
    {"massless_chirality", "massless particle, the sigma_x eigenvalue selects infall or escape"},
    {"sigma_z_flat_slope", "sigma_z initial spin: zero initial velocity"},
    {"naked_source_report", "weak-field naked source: flat limit and displacement comparison"},
    {"time_dependent_beta", "time-dependent metric factor beta(t), stepped evolution"},
    {"convergence_scan", "<x>(t) and variances at increasing Fock cutoffs"},
    {"sideband_plan", "trapped-ion sideband couplings for the model parameters"},
};

// Largest horizons at which the 400-level tail stays below 1e-8.
constexpr double kFig1Horizon = 86.0;
constexpr double kMasslessHorizon = 100.0;
constexpr double kSigmaZHorizon = 87.0;

}  // namespace

const std::vector<ScenarioInfo>& list_scenarios() { return kScenarios; }

bool is_scenario(std::string_view name) {
    return std::any_of(kScenarios.begin(), kScenarios.end(),
                       [&](const ScenarioInfo& s) { return s.name == name; });
}

ScenarioConfig scenario_defaults(std::string_view name) {
    if (!is_scenario(name)) {
        throw InvalidArgument("unknown scenario '" + std::string(name) + "'");
    }
    ScenarioConfig c;
    c.scenario = std::string(name);
    c.t_max = kFig1Horizon;
    if (name == "fig1_massive" || name == "fig2_squeezing") {
        c.ehrenfest = true;
    } else if (name == "massless_chirality") {
        c.m_tilde = 0.0;
        c.spin = SpinLabel::MinusX;
        c.t_max = kMasslessHorizon;
        c.geodesic = true;
        c.ehrenfest = true;
    } else if (name == "sigma_z_flat_slope") {
        c.spin = SpinLabel::PlusZ;
        c.t_max = kSigmaZHorizon;
        c.ehrenfest = true;
    } else if (name == "naked_source_report") {
        c.M_tilde = 0.1;
        c.t_max = 0.0;
    } else if (name == "time_dependent_beta") {
        c.n_max = 200;
        c.t_max = 20.0;
        c.dt_record = 0.1;
    } else if (name == "sideband_plan") {
        c.t_max = 0.0;
    }
    return c;
}

void ScenarioConfig::validate() const {
    if (!is_scenario(scenario)) {
        throw InvalidArgument("unknown scenario '" + scenario + "'");
    }
    const auto require = [](bool ok, const std::string& what) {
        if (!ok) throw InvalidArgument("config: " + what);
    };
    require(std::isfinite(m_tilde) && m_tilde >= 0.0, "m_tilde must be >= 0");
    require(std::isfinite(M_tilde) && M_tilde > 0.0, "M_tilde must be > 0");
    require(n_max >= 2, "n_max must be >= 2");
    require(std::isfinite(X0) && X0 > 0.0, "X0 must be > 0");
    require(std::isfinite(t_max) && t_max >= 0.0, "t_max must be >= 0");
    require(dt_record > 0.0, "dt_record must be > 0");
    require(dt_step > 0.0, "dt_step must be > 0");
    require(tail_threshold > 0.0, "tail_threshold must be > 0");
    require(pde_points >= 8, "pde_points must be >= 8");
    require(pde_extent > 0.0, "pde_extent must be > 0");
    require(eta > 0.0 && eta2 > 0.0, "eta and eta2 must be > 0");
    require(std::isfinite(beta_amplitude) && std::abs(beta_amplitude) < 1.0,
            "beta_amplitude must satisfy |a| < 1 so that beta stays positive");
    require(std::isfinite(beta_frequency), "beta_frequency must be finite");
    require(cutoffs.size() >= 2 && std::is_sorted(cutoffs.begin(), cutoffs.end()) && cutoffs.front() >= 2,
            "cutoffs must be a non-decreasing list of at least two values >= 2");
    require(flat_limit_M_tilde > 0.0, "flat_limit_M_tilde must be > 0");
    if (t_max > 0.0) {
        evolution().validate();
    }
}

ModelParams ScenarioConfig::model() const { return {m_tilde, M_tilde, FockCutoff(n_max)}; }

EvolutionConfig ScenarioConfig::evolution() const {
    EvolutionConfig e;
    e.t_max = t_max;
    e.dt_record = dt_record;
    e.dt_step = dt_step;
    e.tail_threshold = tail_threshold;
    return e;
}

json ScenarioConfig::to_json() const {
    return json{
        {"scenario", scenario},
        {"m_tilde", m_tilde},
        {"M_tilde", M_tilde},
        {"n_max", n_max},
        {"X0", X0},
        {"spin", std::string(to_string(spin))},
        {"t_max", t_max},
        {"dt_record", dt_record},
        {"dt_step", dt_step},
        {"tail_threshold", tail_threshold},
        {"pde", pde},
        {"geodesic", geodesic},
        {"ehrenfest", ehrenfest},
        {"pde_points", pde_points},
        {"pde_extent", pde_extent},
        {"eta", eta},
        {"eta2", eta2},
        {"beta_amplitude", beta_amplitude},
        {"beta_frequency", beta_frequency},
        {"cutoffs", cutoffs},
        {"flat_limit_M_tilde", flat_limit_M_tilde},
        {"out_dir", out_dir.string()},
    };
}

namespace {

template <typename T>
T get_as(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw InvalidArgument("config: key '" + key + "' has the wrong type");
    }
}

double get_number(const json& value, const std::string& key) {
    if (!value.is_number()) {
        throw InvalidArgument("config: key '" + key + "' must be a number");
    }
    return value.get<double>();
}

int get_int(const json& value, const std::string& key) {
    if (!value.is_number_integer()) {
        throw InvalidArgument("config: key '" + key + "' must be an integer");
    }
    return value.get<int>();
}

bool get_bool(const json& value, const std::string& key) {
    if (!value.is_boolean()) {
        throw InvalidArgument("config: key '" + key + "' must be true or false");
    }
    return value.get<bool>();
}

SpinLabel get_spin(const std::string& text) {
    try {
        return parse_spin_label(text);
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
}

void apply_file(ScenarioConfig& c, const json& doc) {
    if (doc.is_null()) {
        return;
    }
    if (!doc.is_object()) {
        throw InvalidArgument("config: top level must be a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (key == "scenario") {
            if (get_as<std::string>(value, key) != c.scenario) {
                throw InvalidArgument("config: file is for scenario '" + value.get<std::string>() +
                                      "', not '" + c.scenario + "'");
            }
        } else if (key == "m_tilde") {
            c.m_tilde = get_number(value, key);
        } else if (key == "M_tilde") {
            c.M_tilde = get_number(value, key);
        } else if (key == "n_max") {
            c.n_max = get_int(value, key);
        } else if (key == "X0") {
            c.X0 = get_number(value, key);
        } else if (key == "spin") {
            c.spin = get_spin(get_as<std::string>(value, key));
        } else if (key == "t_max") {
            c.t_max = get_number(value, key);
        } else if (key == "dt_record") {
            c.dt_record = get_number(value, key);
        } else if (key == "dt_step") {
            c.dt_step = get_number(value, key);
        } else if (key == "tail_threshold") {
            c.tail_threshold = get_number(value, key);
        } else if (key == "pde") {
            c.pde = get_bool(value, key);
        } else if (key == "geodesic") {
            c.geodesic = get_bool(value, key);
        } else if (key == "ehrenfest") {
            c.ehrenfest = get_bool(value, key);
        } else if (key == "pde_points") {
            c.pde_points = get_int(value, key);
        } else if (key == "pde_extent") {
            c.pde_extent = get_number(value, key);
        } else if (key == "eta") {
            c.eta = get_number(value, key);
        } else if (key == "eta2") {
            c.eta2 = get_number(value, key);
        } else if (key == "beta_amplitude") {
            c.beta_amplitude = get_number(value, key);
        } else if (key == "beta_frequency") {
            c.beta_frequency = get_number(value, key);
        } else if (key == "cutoffs") {
            if (!value.is_array()) {
                throw InvalidArgument("config: key 'cutoffs' must be an array of integers");
            }
            c.cutoffs.clear();
            for (const auto& v : value) {
                c.cutoffs.push_back(get_int(v, key));
            }
        } else if (key == "flat_limit_M_tilde") {
            c.flat_limit_M_tilde = get_number(value, key);
        } else if (key == "out_dir") {
            c.out_dir = get_as<std::string>(value, key);
        } else {
            throw InvalidArgument("config: unknown key '" + key + "'");
        }
    }
}

}  // namespace

ScenarioConfig parse_config(std::string_view scenario, const json& file, const ConfigOverrides& o) {
    ScenarioConfig c = scenario_defaults(scenario);
    apply_file(c, file);
    if (o.out_dir) c.out_dir = *o.out_dir;
    if (o.n_max) c.n_max = *o.n_max;
    if (o.t_max) c.t_max = *o.t_max;
    if (o.m_tilde) c.m_tilde = *o.m_tilde;
    if (o.M_tilde) c.M_tilde = *o.M_tilde;
    if (o.X0) c.X0 = *o.X0;
    if (o.spin) c.spin = get_spin(*o.spin);
    c.validate();
    return c;
}

ScenarioConfig parse_config(std::string_view scenario, const std::optional<std::filesystem::path>& path,
                            const ConfigOverrides& overrides) {
    json doc;
    if (path) {
        std::ifstream in(*path);
        if (!in) {
            throw InvalidArgument("config: cannot read " + path->string());
        }
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw InvalidArgument("config: malformed JSON in " + path->string() + ": " + e.what());
        }
    }
    return parse_config(scenario, doc, overrides);
}

json plan_json(const ModelParams& params, double eta, double eta2) {
    const auto plan = sideband_plan(params, eta, eta2);
    return json{
        {"units", std::string(kUnitsLine.substr(2))},
        {"m_tilde", params.m_tilde()},
        {"M_tilde", params.M_tilde()},
        {"r_s", params.r_s()},
        {"eta", plan.eta},
        {"eta2", plan.eta2},
        {"Omega_r", plan.Omega_r},
        {"Omega_b", plan.Omega_b},
        {"Omega_r2", plan.Omega_r2},
        {"Omega_b2", plan.Omega_b2},
        {"eta_Omega_r", plan.eta * plan.Omega_r},
        {"eta_Omega_b", plan.eta * plan.Omega_b},
        {"eta2_sq_Omega_r2", plan.eta2 * plan.eta2 * plan.Omega_r2},
        {"eta2_sq_Omega_b2", plan.eta2 * plan.eta2 * plan.Omega_b2},
    };
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct FockRun {
    ModelParams params;
    SpinorState initial;
    std::optional<Propagator> prop;
    std::vector<TrajectoryRecord> records;
    std::vector<MomentSample> moments;
    std::optional<SpinorState> last_trusted;
    std::optional<TruncationWarning> warning;
    double h_norm = 0.0;

    std::size_t trusted_count() const {
        std::size_t n = 0;
        while (n < records.size() && records[n].trusted) ++n;
        return n;
    }
    double trusted_until() const {
        const auto n = trusted_count();
        return n > 0 ? records[n - 1].t : 0.0;
    }
};

SpinorState initial_state(const ScenarioConfig& c, FockCutoff cutoff) {
    return product_state(spinor(c.spin), coherent_state(cutoff, c.X0));
}

FockRun run_static(const ScenarioConfig& c) {
    FockRun run{c.model(), initial_state(c, FockCutoff(c.n_max)), {}, {}, {}, {}, {}, {}};
    const auto h = build_dirac_bh(run.params);
    run.prop.emplace(make_propagator(h));
    run.h_norm = run.prop->spectral_norm();
    const ObservableSet obs(run.params, h);
    const auto cutoff = run.params.cutoff();
    run.warning = evolve_stream(run.initial, *run.prop, c.evolution(), [&](const SampleView& s) {
        run.records.push_back(obs.record(s.amplitudes, s.t, s.tail, s.trusted));
        run.moments.push_back(obs.moments(s.amplitudes, s.t));
        if (s.trusted) {
            run.last_trusted = SpinorState::with_tolerance(cutoff, s.amplitudes, 1e-10);
        }
    });
    return run;
}

FockRun run_time_dependent(const ScenarioConfig& c) {
    FockRun run{c.model(), initial_state(c, FockCutoff(c.n_max)), {}, {}, {}, {}, {}, {}};
    const auto beta = BetaSchedule::sinusoidal(c.beta_amplitude, c.beta_frequency);
    const ModelParams params = run.params;
    const auto schedule = [&](double t) { return build_time_dependent(params, beta, t); };
    const auto result = evolve_td(run.initial, schedule, c.evolution());
    const ObservableSet obs(params);
    for (const auto& s : result.samples) {
        auto rec = obs.record(s.state.amplitudes(), s.t, s.tail, s.trusted);
        const Vector hpsi = schedule(s.t).matrix() * s.state.amplitudes();
        rec.energy = s.state.amplitudes().dot(hpsi).real();
        run.records.push_back(rec);
        run.moments.push_back(obs.moments(s.state.amplitudes(), s.t));
        if (s.trusted) run.last_trusted = s.state;
    }
    run.warning = result.warning;
    return run;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

json conservation_metrics(const FockRun& run) {
    double norm_drift = 0.0;
    double energy_drift = 0.0;
    double min_product = std::numeric_limits<double>::infinity();
    double cs_slack = std::numeric_limits<double>::infinity();
    const double e0 = run.records.front().energy;
    for (const auto& r : run.records) {
        norm_drift = std::max(norm_drift, std::abs(r.norm - 1.0));
        energy_drift = std::max(energy_drift, std::abs(r.energy - e0));
        min_product = std::min(min_product, r.var_X * r.var_P);
    }
    for (const auto& m : run.moments) {
        cs_slack = std::min(cs_slack, std::sqrt(std::max(m.X4, 0.0)) - std::abs(m.X2_sy));
    }
    return json{{"max_norm_drift", norm_drift},
                {"max_energy_drift", energy_drift},
                {"hamiltonian_norm", run.h_norm},
                {"min_uncertainty_product", min_product},
                {"min_cauchy_schwarz_slack", cs_slack}};
}

json trajectory_metrics(const FockRun& run, const ScenarioConfig& c) {
    const auto n = run.trusted_count();
    const double T = run.trusted_until();
    const auto& recs = run.records;
    const double rs = run.params.r_s();
    const double x0 = recs.front().mean_x;
    std::vector<MomentSample> window(run.moments.begin(), run.moments.begin() + n);

    double sum_x = 0.0;
    int count_x = 0;
    std::vector<double> ts, log_vp;
    for (std::size_t i = 0; i < n; ++i) {
        if (recs[i].t >= 0.8 * T - 1e-12) {
            sum_x += recs[i].mean_x;
            ++count_x;
        }
        if (recs[i].t >= 0.5 * T - 1e-12) {
            ts.push_back(recs[i].t);
            log_vp.push_back(std::log(recs[i].var_P));
        }
    }
    const auto zb = zitterbewegung_metrics(window, 1e-9);
    json j{
        {"x0", x0},
        {"r_s", rs},
        {"initial_slope_X", zero_slope_check(run.initial, run.params)},
        {"window_mean_x_final20", count_x > 0 ? json(sum_x / count_x) : json(nullptr)},
        {"horizon_band_upper", rs + 0.15 * (x0 - rs)},
        {"log_var_P_slope_final_half", finite_or_null(least_squares_slope(ts, log_vp))},
        {"log_var_X_slope_final_half", nullptr},
        {"var_X_initial", recs.front().var_X},
        {"var_X_end", n > 0 ? json(recs[n - 1].var_X) : json(nullptr)},
        {"var_P_end", n > 0 ? json(recs[n - 1].var_P) : json(nullptr)},
        {"var_X_end_ratio", n > 0 ? json(recs[n - 1].var_X / recs.front().var_X) : json(nullptr)},
        {"zitterbewegung",
         {{"extrema", zb.extrema_X.size()},
          {"complete", zb.complete},
          {"early_envelope", zb.early_envelope},
          {"late_envelope", zb.late_envelope},
          {"envelope_ratio", zb.complete ? json(zb.envelope_ratio) : json(nullptr)},
          {"max_envelope", zb.max_envelope}}},
    };
    std::vector<double> log_vx;
    for (std::size_t i = 0; i < n; ++i) {
        if (recs[i].t >= 0.5 * T - 1e-12) log_vx.push_back(std::log(recs[i].var_X));
    }
    j["log_var_X_slope_final_half"] = finite_or_null(least_squares_slope(ts, log_vx));

    if (c.ehrenfest && n >= 5) {
        const auto table = ehrenfest_residuals(window, run.params);
        json e{{"dt", c.dt_record}};
        json rel = json::array();
        json abs_max = json::array();
        for (int i = 0; i < 4; ++i) {
            rel.push_back(table.relative(i));
            abs_max.push_back(table.max_residual[i]);
        }
        e["max_relative_residual"] = rel;
        e["max_abs_residual"] = abs_max;
        if (n >= 10) {
            std::vector<MomentSample> coarse;
            for (std::size_t i = 0; i < n; i += 2) coarse.push_back(window[i]);
            const auto table2 = ehrenfest_residuals(coarse, run.params);
            json order = json::array();
            for (int i = 0; i < 4; ++i) {
                const double fine = table.max_residual[i];
                order.push_back(fine > 0.0 ? finite_or_null(std::log2(table2.max_residual[i] / fine))
                                           : json(nullptr));
            }
            e["halving_order"] = order;
        }
        j["ehrenfest"] = e;
    }

    if (c.geodesic && c.m_tilde == 0.0 && (c.spin == SpinLabel::PlusX || c.spin == SpinLabel::MinusX)) {
        const int branch = c.spin == SpinLabel::PlusX ? 1 : -1;
        double geo_err = 0.0;
        double squeeze_err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double geo = massless_geodesic(x0, rs, branch, recs[i].t);
            geo_err = std::max(geo_err, std::abs(recs[i].mean_x - geo) / geo);
            const double dX = std::sqrt(0.5) * std::exp(branch * recs[i].t / (2.0 * rs));
            squeeze_err = std::max(squeeze_err, std::abs(std::sqrt(recs[i].var_X) - dX) / dX);
        }
        j["geodesic_branch"] = branch;
        j["geodesic_max_rel_err"] = geo_err;
        j["squeeze_max_rel_err"] = squeeze_err;
    }
    return j;
}

void write_densities(const FockRun& run, const std::filesystem::path& dir, json& summary) {
    const auto write_pair = [&](const SpinorState& state, const TrajectoryRecord& rec, const std::string& tag) {
        const auto pX = density_X(state, default_X_grid(rec));
        const auto px = density_x(state, run.params, default_x_grid(rec, run.params));
        write_density_csv(dir / ("density_" + tag + "_X.csv"), pX);
        write_density_csv(dir / ("density_" + tag + "_x.csv"), px);
        summary["densities"][tag] = {{"t", rec.t},
                                     {"captured_X", pX.captured()},
                                     {"captured_x", px.captured()},
                                     {"fringes_X", count_fringes(pX)},
                                     {"fringes_x", count_fringes(px)}};
    };
    write_pair(run.initial, run.records.front(), "initial");
    const auto n = run.trusted_count();
    if (run.last_trusted && n > 0) {
        write_pair(*run.last_trusted, run.records[n - 1], "final");
    }
}

json pde_comparison(const FockRun& run, const ScenarioConfig& c) {
    const double T = run.trusted_until();
    const double h = c.pde_extent / c.pde_points;
    const auto initial = gaussian_packet(h, c.pde_extent, c.pde_points, c.X0, c.spin);
    std::vector<double> checkpoints;
    for (double f : {0.25, 0.5, 0.75}) {
        checkpoints.push_back(std::round(f * T / c.dt_step) * c.dt_step);
    }
    PdeConfig pc;
    pc.dt_step = c.dt_step;
    const auto pde = pde_evolve(run.params, initial, checkpoints, pc);
    json rows = json::array();
    double worst = 0.0;
    for (const auto& snap : pde.snapshots) {
        const Vector psi = run.prop->apply(run.initial.amplitudes(), snap.t);
        const auto fock = density_X(SpinorState::with_tolerance(run.params.cutoff(), psi, 1e-10), snap.psi.X);
        const double l1 = l1_distance(snap.psi.X, snap.psi.density(), fock.density);
        worst = std::max(worst, l1);
        rows.push_back({{"t", snap.t}, {"l1", l1}});
    }
    return json{{"points", c.pde_points},
                {"extent", c.pde_extent},
                {"dt_step", c.dt_step},
                {"checkpoints", rows},
                {"max_l1", worst},
                {"max_norm_drift", pde.max_norm_drift},
                {"max_boundary_mass", pde.max_boundary_mass}};
}

json base_summary(const ScenarioConfig& c) {
    return json{{"scenario", c.scenario},
                {"units", std::string(kUnitsLine.substr(2))},
                {"config", c.to_json()},
                {"t_max", c.t_max},
                {"trusted_until", 0.0}};
}

ExitStatus finish_run(const FockRun& run, const ScenarioConfig& c, json& summary) {
    summary["trusted_until"] = run.trusted_until();
    summary["samples"] = run.records.size();
    if (run.warning) {
        summary["truncation_warning"] = {{"t", run.warning->t}, {"tail", run.warning->tail}};
    } else {
        summary["truncation_warning"] = nullptr;
    }
    summary["conservation"] = conservation_metrics(run);
    summary["metrics"] = trajectory_metrics(run, c);
    write_trajectory_csv(c.out_dir / "trajectory.csv", run.records);
    write_densities(run, c.out_dir, summary);
    return run.warning ? ExitStatus::WindowExhausted : ExitStatus::Ok;
}

ExitStatus run_fock_scenario(const ScenarioConfig& c, json& summary) {
    const auto run = run_static(c);
    const auto status = finish_run(run, c, summary);
    if (c.pde) {
        const auto pde = pde_comparison(run, c);
        write_json(c.out_dir / "pde.json", pde);
        summary["pde"] = pde;
    }
    return status;
}

ExitStatus run_time_dependent_scenario(const ScenarioConfig& c, json& summary) {
    const auto run = run_time_dependent(c);
    summary["beta"] = BetaSchedule::sinusoidal(c.beta_amplitude, c.beta_frequency).description();
    return finish_run(run, c, summary);
}

json term_json(const TermDifference& t) {
    return json{{"term", t.term},
                {"max_abs_diff", t.max_abs_diff},
                {"frobenius_diff", t.frobenius_diff},
                {"frobenius_reference", t.frobenius_reference},
                {"relative", t.relative}};
}

ExitStatus run_naked_source(const ScenarioConfig& c, json& summary) {
    const ModelParams flat(c.m_tilde, c.flat_limit_M_tilde, FockCutoff(c.n_max));
    const Operator diff = build_naked_source(flat) - build_flat_dirac(flat);
    json flat_json{{"M_tilde", c.flat_limit_M_tilde}, {"max_abs_diff", max_abs(diff.matrix())}};

    const auto report = displacement_equivalence_report(c.model());
    json terms = json::array();
    for (const auto& t : report.terms) terms.push_back(term_json(t));
    json rep{{"M_tilde", c.M_tilde},
             {"displacement", report.displacement},
             {"discarded_probability", report.discarded_probability},
             {"interior_levels", report.interior_levels},
             {"displaced_position_defect", report.displaced_position_defect},
             {"terms", terms}};
    const json doc{{"flat_limit", flat_json}, {"displacement_report", rep}};
    write_json(c.out_dir / "naked_source_report.json", doc);
    summary["metrics"] = doc;
    return ExitStatus::Ok;
}

ExitStatus run_convergence(const ScenarioConfig& c, json& summary) {
    RunSpec spec;
    spec.m_tilde = c.m_tilde;
    spec.M_tilde = c.M_tilde;
    spec.X0 = c.X0;
    spec.spin = c.spin;
    spec.cfg = c.evolution();
    const auto rows = convergence_scan(spec, c.cutoffs);
    std::filesystem::create_directories(c.out_dir);
    std::ofstream csv(c.out_dir / "convergence.csv", std::ios::binary);
    csv << kUnitsLine << '\n' << "n_lo,n_hi,window_end,max_abs_mean_x,max_rel_mean_x,max_var_X,max_var_P\n";
    json jr = json::array();
    double worst = 0.0;
    for (const auto& r : rows) {
        csv << r.n_lo << ',' << r.n_hi << ',' << format_double(r.window_end) << ','
            << format_double(r.max_abs_mean_x) << ',' << format_double(r.max_rel_mean_x) << ','
            << format_double(r.max_var_X) << ',' << format_double(r.max_var_P) << '\n';
        jr.push_back({{"n_lo", r.n_lo},
                      {"n_hi", r.n_hi},
                      {"window_end", r.window_end},
                      {"max_abs_mean_x", r.max_abs_mean_x},
                      {"max_rel_mean_x", r.max_rel_mean_x},
                      {"max_var_X", r.max_var_X},
                      {"max_var_P", r.max_var_P}});
        worst = std::max(worst, r.max_rel_mean_x);
    }
    const double window = rows.front().window_end;
    summary["trusted_until"] = window;
    summary["metrics"] = {{"rows", jr}, {"max_rel_mean_x", worst}};
    return window + 1e-9 < c.evolution().sample_times().back() ? ExitStatus::WindowExhausted : ExitStatus::Ok;
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& c) {
    c.validate();
    std::filesystem::create_directories(c.out_dir);
    ScenarioOutcome out;
    out.summary = base_summary(c);
    const auto& name = c.scenario;
    if (name == "fig1_massive" || name == "fig2_squeezing" || name == "massless_chirality" ||
        name == "sigma_z_flat_slope") {
        out.status = run_fock_scenario(c, out.summary);
    } else if (name == "time_dependent_beta") {
        out.status = run_time_dependent_scenario(c, out.summary);
    } else if (name == "naked_source_report") {
        out.status = run_naked_source(c, out.summary);
    } else if (name == "convergence_scan") {
        out.status = run_convergence(c, out.summary);
    } else if (name == "sideband_plan") {
        const auto plan = plan_json(c.model(), c.eta, c.eta2);
        write_json(c.out_dir / "plan.json", plan);
        out.summary["metrics"] = plan;
    }
    out.summary["exit_status"] = static_cast<int>(out.status);
    write_json(c.out_dir / "summary.json", out.summary);
    return out;
}

}  // namespace cqrm
