// sim: run, list and plan the black-hole Dirac scenarios.

#include "cqrm/scenarios.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Trapped-ion simulation of a Dirac particle near a black hole"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run one scenario and write its results");
    std::string scenario;
    std::optional<std::string> config_path;
    cqrm::ConfigOverrides overrides;
    run->add_option("--scenario", scenario, "Scenario name (see `sim list`)")->required();
    run->add_option("--config", config_path, "JSON configuration file");
    run->add_option("--out", overrides.out_dir, "Output directory");
    run->add_option("--n-max", overrides.n_max, "Fock cutoff");
    run->add_option("--t-max", overrides.t_max, "Final time");
    run->add_option("--m", overrides.m_tilde, "Particle mass m_tilde");
    run->add_option("--M", overrides.M_tilde, "Black-hole mass M_tilde");
    run->add_option("--x0", overrides.X0, "Initial ion displacement X0");
    run->add_option("--spin", overrides.spin, "Initial spin: plus_x, minus_x, plus_y, minus_y, plus_z, minus_z");

    app.add_subcommand("list", "List the built-in scenarios");

    auto* plan = app.add_subcommand("plan", "Print trapped-ion sideband couplings");
    double eta = 1.0;
    double eta2 = 1.0;
    double m = 0.3;
    double M = 0.01;
    std::optional<std::string> plan_out;
    plan->add_option("--eta", eta, "Lamb-Dicke parameter of the first sidebands")->capture_default_str();
    plan->add_option("--eta2", eta2, "Lamb-Dicke parameter of the second sidebands")->capture_default_str();
    plan->add_option("--m", m, "Particle mass m_tilde")->capture_default_str();
    plan->add_option("--M", M, "Black-hole mass M_tilde")->capture_default_str();
    plan->add_option("--out", plan_out, "Directory for plan.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand("list")) {
            for (const auto& s : cqrm::list_scenarios()) {
                std::cout << s.name << "\t" << s.description << '\n';
            }
            return 0;
        }
        if (app.got_subcommand("plan")) {
            const cqrm::ModelParams params(m, M, cqrm::FockCutoff(2));
            const auto doc = cqrm::plan_json(params, eta, eta2);
            if (plan_out) {
                cqrm::write_json(std::filesystem::path(*plan_out) / "plan.json", doc);
            }
            std::cout << doc.dump(2) << '\n';
            return 0;
        }
        const auto cfg = cqrm::parse_config(scenario, config_path.has_value()
                                                          ? std::optional<std::filesystem::path>(*config_path)
                                                          : std::nullopt,
                                            overrides);
        const auto outcome = cqrm::run_scenario(cfg);
        if (outcome.status == cqrm::ExitStatus::WindowExhausted) {
            std::cerr << "sim: truncation tail exceeded the threshold before t_max; trusted until t="
                      << outcome.summary["trusted_until"] << '\n';
        }
        std::cout << cfg.out_dir.string() << "/summary.json\n";
        return static_cast<int>(outcome.status);
    } catch (const std::exception& e) {
        std::cerr << "sim: " << e.what() << '\n';
        return 1;
    }
}
