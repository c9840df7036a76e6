#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cqrm/scenarios.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

using namespace cqrm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "cqrm_test_scenarios" / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("scenario list") {
    const auto& all = list_scenarios();
    CHECK(all.size() == 8);
    for (const char* name : {"fig1_massive", "fig2_squeezing", "massless_chirality", "sigma_z_flat_slope",
                             "naked_source_report", "time_dependent_beta", "convergence_scan", "sideband_plan"}) {
        CHECK(is_scenario(name));
        const auto cfg = parse_config(name, nlohmann::json{});
        CHECK(cfg.scenario == name);
        CHECK(cfg.to_json()["scenario"] == name);
    }
    CHECK_FALSE(is_scenario("fig3"));
    CHECK_THROWS_AS(parse_config("fig3", nlohmann::json{}), InvalidArgument);
}

TEST_CASE("defaults and precedence") {
    const auto fig1 = parse_config("fig1_massive", nlohmann::json{});
    CHECK(fig1.m_tilde == 0.3);
    CHECK(fig1.M_tilde == 0.01);
    CHECK(fig1.X0 == 8.0);
    CHECK(fig1.spin == SpinLabel::PlusX);
    CHECK(fig1.n_max == 400);
    CHECK(fig1.model().r_s() == 50.0);

    const auto massless = parse_config("massless_chirality", nlohmann::json{});
    CHECK(massless.m_tilde == 0.0);
    CHECK(massless.t_max == 100.0);

    ConfigOverrides o;
    o.n_max = 800;
    const auto cfg = parse_config("fig1_massive", nlohmann::json{{"n_max", 400}, {"t_max", 10.0}}, o);
    CHECK(cfg.n_max == 800);
    CHECK(cfg.t_max == 10.0);

    o = {};
    o.spin = "minus_x";
    o.m_tilde = 0.0;
    const auto c2 = parse_config("fig1_massive", nlohmann::json{{"spin", "plus_z"}}, o);
    CHECK(c2.spin == SpinLabel::MinusX);
    CHECK(c2.m_tilde == 0.0);
}

TEST_CASE("invalid configs are rejected") {
    CHECK_THROWS_AS(parse_config("fig1_massive", nlohmann::json{{"m_tilde", -1}}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("fig1_massive", nlohmann::json{{"M_tilde", 0}}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("fig1_massive", nlohmann::json{{"n_max", 1}}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("fig1_massive", nlohmann::json{{"n_max", 4.5}}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("fig1_massive", nlohmann::json{{"bogus", 1}}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("fig1_massive", nlohmann::json{{"spin", "sideways"}}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("fig1_massive", nlohmann::json{{"t_max", "long"}}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("fig1_massive", nlohmann::json{{"scenario", "sideband_plan"}}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("fig1_massive", nlohmann::json::array()), InvalidArgument);
    ConfigOverrides o;
    o.m_tilde = -1.0;
    CHECK_THROWS_AS(parse_config("fig1_massive", nlohmann::json{}, o), InvalidArgument);

    const fs::path dir = scratch("malformed");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{ \"n_max\": ";
    CHECK_THROWS_AS(parse_config("fig1_massive", std::optional<fs::path>(dir / "bad.json")), InvalidArgument);
    CHECK_THROWS_AS(parse_config("fig1_massive", std::optional<fs::path>(dir / "missing.json")), InvalidArgument);
}

TEST_CASE("config file round trip") {
    const fs::path dir = scratch("roundtrip");
    fs::create_directories(dir);
    auto cfg = parse_config("time_dependent_beta", nlohmann::json{{"beta_amplitude", 0.25}});
    std::ofstream(dir / "cfg.json") << cfg.to_json().dump();
    const auto back = parse_config("time_dependent_beta", std::optional<fs::path>(dir / "cfg.json"));
    CHECK(back.to_json() == cfg.to_json());
}

TEST_CASE("number formatting round-trips") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        const double v = i % 3 == 0 ? u(rng) * 1e-300 : u(rng);
        const std::string s = format_double(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
    }
    CHECK(format_double(51.29) == "51.29");
}

TEST_CASE("sideband plan scenario") {
    auto cfg = parse_config("sideband_plan", nlohmann::json{});
    cfg.out_dir = scratch("plan");
    const auto out = run_scenario(cfg);
    CHECK(out.status == ExitStatus::Ok);
    const auto plan = read_json(cfg.out_dir / "plan.json");
    CHECK(std::abs(plan["eta_Omega_r"].get<double>() - 4.2426e-3) <= 1e-7);
    CHECK(plan["eta2_sq_Omega_r2"].get<double>() == 5.0e-3);
    const auto summary = read_json(cfg.out_dir / "summary.json");
    CHECK(summary.contains("trusted_until"));
    CHECK(summary["config"]["scenario"] == "sideband_plan");
}

TEST_CASE("massive scenario files") {
    ConfigOverrides o;
    o.t_max = 4.0;
    o.out_dir = scratch("fig1").string();
    auto cfg = parse_config("fig1_massive", nlohmann::json{{"dt_record", 0.1}}, o);
    const auto out = run_scenario(cfg);
    CHECK(out.status == ExitStatus::Ok);

    const auto rows = lines(cfg.out_dir / "trajectory.csv");
    REQUIRE(rows.size() == 2 + 41);
    CHECK(rows[0].rfind("# units", 0) == 0);
    CHECK(rows[1] == "t,mean_X,mean_X2,mean_x,var_X,var_P,cov_XP,sx,sy,sz,energy,norm,tail,trusted");
    std::stringstream first(rows[2]);
    std::string t, mX, mX2, mx;
    std::getline(first, t, ',');
    std::getline(first, mX, ',');
    std::getline(first, mX2, ',');
    std::getline(first, mx, ',');
    CHECK(std::stod(mx) == doctest::Approx(51.29).epsilon(1e-12));
    CHECK(rows.back().back() == '1');

    for (const char* f : {"density_initial_X.csv", "density_initial_x.csv", "density_final_X.csv",
                          "density_final_x.csv"}) {
        const auto d = lines(cfg.out_dir / f);
        REQUIRE(d.size() == 2 + 4096);
        CHECK(d[0].rfind("# units", 0) == 0);
        CHECK(d[1] == "coord,value");
    }
    const auto summary = read_json(cfg.out_dir / "summary.json");
    CHECK(summary["trusted_until"].get<double>() == doctest::Approx(4.0));
    CHECK(summary["config"]["n_max"] == 400);
    CHECK(summary["units"].get<std::string>().find("natural") != std::string::npos);
    CHECK(summary["metrics"]["initial_slope_X"].get<double>() == doctest::Approx(0.08));
}

TEST_CASE("identical configs give identical files") {
    ConfigOverrides o;
    o.t_max = 3.0;
    o.n_max = 200;
    auto a = parse_config("massless_chirality", nlohmann::json{{"dt_record", 0.5}}, o);
    auto b = a;
    a.out_dir = scratch("det_a");
    b.out_dir = scratch("det_b");
    run_scenario(a);
    run_scenario(b);
    for (const char* f : {"trajectory.csv", "density_final_x.csv"}) {
        CHECK(slurp(a.out_dir / f) == slurp(b.out_dir / f));
    }
    auto sa = read_json(a.out_dir / "summary.json");
    auto sb = read_json(b.out_dir / "summary.json");
    sa["config"].erase("out_dir");
    sb["config"].erase("out_dir");
    CHECK(sa.dump() == sb.dump());
}

TEST_CASE("massless scenario reports the geodesic lock") {
    ConfigOverrides o;
    o.out_dir = scratch("massless").string();
    o.t_max = 40.0;
    const auto cfg = parse_config("massless_chirality", nlohmann::json{{"dt_record", 0.5}}, o);
    const auto out = run_scenario(cfg);
    CHECK(out.status == ExitStatus::Ok);
    CHECK(out.summary["metrics"]["geodesic_max_rel_err"].get<double>() <= 1e-3);
    CHECK(out.summary["metrics"]["squeeze_max_rel_err"].get<double>() <= 1e-6);
}

TEST_CASE("window exhaustion gives status 2") {
    ConfigOverrides o;
    o.out_dir = scratch("exhausted").string();
    o.n_max = 150;
    o.t_max = 100.0;
    const auto cfg = parse_config("fig1_massive", nlohmann::json{{"dt_record", 1.0}, {"ehrenfest", false}}, o);
    const auto out = run_scenario(cfg);
    CHECK(out.status == ExitStatus::WindowExhausted);
    CHECK(out.summary["trusted_until"].get<double>() < 100.0);
    CHECK(read_json(cfg.out_dir / "summary.json")["exit_status"] == 2);
}

TEST_CASE("naked source and time-dependent scenarios") {
    ConfigOverrides o;
    o.out_dir = scratch("naked").string();
    o.n_max = 300;
    const auto naked = run_scenario(parse_config("naked_source_report", nlohmann::json{}, o));
    CHECK(naked.status == ExitStatus::Ok);
    CHECK(naked.summary["metrics"]["flat_limit"]["max_abs_diff"].get<double>() <= 1e-4);
    CHECK(naked.summary["metrics"]["displacement_report"]["terms"].size() == 3);

    ConfigOverrides t;
    t.out_dir = scratch("beta").string();
    t.t_max = 2.0;
    t.n_max = 100;
    const auto td = run_scenario(parse_config("time_dependent_beta", nlohmann::json{}, t));
    CHECK(td.status == ExitStatus::Ok);
    CHECK(td.summary["conservation"]["max_norm_drift"].get<double>() <= 1e-8);
}

TEST_CASE("convergence scenario") {
    ConfigOverrides o;
    o.out_dir = scratch("conv").string();
    o.t_max = 10.0;
    const auto cfg =
        parse_config("convergence_scan", nlohmann::json{{"cutoffs", {200, 300}}, {"dt_record", 0.5}}, o);
    const auto out = run_scenario(cfg);
    CHECK(out.status == ExitStatus::Ok);
    CHECK(out.summary["metrics"]["max_rel_mean_x"].get<double>() <= 1e-4);
    CHECK(lines(cfg.out_dir / "convergence.csv").size() == 3);
}
