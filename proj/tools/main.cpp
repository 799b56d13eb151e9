// Command-line front end: dataset ingestion, propriety checking, model
// fitting, the simulation study, and re-summarizing stored draws.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fhvar/errors.hpp"
#include "fhvar/io.hpp"
#include "fhvar/model.hpp"
#include "fhvar/posterior.hpp"
#include "fhvar/sampler.hpp"
#include "fhvar/simulation.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct Manifest {
    std::string input;
    std::string model = "stk1";
    std::uint64_t seed = 1;
    std::size_t burn_in = 1000;
    std::size_t draws = 5000;
    std::size_t thin = 1;
    double mh_step = 0.04;
    std::vector<double> levels{0.95, 0.99};
    double a_default = 2.0;
    std::string b_rule = "inverse-n";
    std::string out = "out";
    unsigned jobs = 0;

    // Simulation section; defaults reproduce the standard study setup.
    Eigen::Index sim_m = 30;
    std::vector<int> sim_n{7};
    double sim_beta0 = 0.5;
    double sim_beta1 = 0.8;
    double sim_tau2 = 1.0;
    std::string regime_type = "inverse-gamma";
    double regime_shape = 10.0;
    double regime_scale_coef = 5.0;
    double regime_z_coef = 0.3;
    double regime_lo = 0.5;
    double regime_hi = 5.0;
    std::pair<double, double> z_range{2.0, 8.0};
    int replications = 200;
    std::vector<std::string> methods{"stk1", "stk2", "yc"};
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw fhvar::ValidationError("cannot open config '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw fhvar::ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

template <typename T>
void overlay(const CLI::App& cmd, const std::string& flag, const json& cfg, const char* key,
             T& value) {
    if (cmd.count(flag) == 0 && cfg.contains(key)) {
        try {
            value = cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw fhvar::ValidationError(std::string("config key '") + key + "': " + e.what());
        }
    }
}

void apply_config(const CLI::App& cmd, const std::string& config_path, Manifest& manifest) {
    if (config_path.empty()) {
        return;
    }
    const json cfg = load_config(config_path);
    overlay(cmd, "--model", cfg, "model", manifest.model);
    overlay(cmd, "--seed", cfg, "seed", manifest.seed);
    overlay(cmd, "--burn-in", cfg, "burn_in", manifest.burn_in);
    overlay(cmd, "--draws", cfg, "draws", manifest.draws);
    overlay(cmd, "--thin", cfg, "thin", manifest.thin);
    overlay(cmd, "--mh-step", cfg, "mh_step", manifest.mh_step);
    overlay(cmd, "--levels", cfg, "levels", manifest.levels);
    overlay(cmd, "--a-default", cfg, "a_default", manifest.a_default);
    overlay(cmd, "--b-rule", cfg, "b_rule", manifest.b_rule);
    overlay(cmd, "--out", cfg, "out", manifest.out);
    overlay(cmd, "--jobs", cfg, "jobs", manifest.jobs);
    if (cfg.contains("input") && cmd.count("input") == 0) {
        manifest.input = cfg.at("input").get<std::string>();
    }

    if (!cfg.contains("sim")) {
        return;
    }
    const json& sim = cfg.at("sim");
    if (sim.contains("m")) manifest.sim_m = sim.at("m").get<Eigen::Index>();
    if (sim.contains("n")) {
        if (sim.at("n").is_array()) {
            manifest.sim_n = sim.at("n").get<std::vector<int>>();
        } else {
            manifest.sim_n = {sim.at("n").get<int>()};
        }
    }
    if (sim.contains("beta0")) manifest.sim_beta0 = sim.at("beta0").get<double>();
    if (sim.contains("beta1")) manifest.sim_beta1 = sim.at("beta1").get<double>();
    if (sim.contains("tau2")) manifest.sim_tau2 = sim.at("tau2").get<double>();
    if (sim.contains("z_range")) {
        const auto range = sim.at("z_range").get<std::vector<double>>();
        if (range.size() != 2) {
            throw fhvar::ValidationError("sim.z_range must be [lo, hi]");
        }
        manifest.z_range = {range[0], range[1]};
    }
    overlay(cmd, "--replications", sim, "replications", manifest.replications);
    if (sim.contains("methods")) manifest.methods = sim.at("methods").get<std::vector<std::string>>();
    if (sim.contains("variance_regime")) {
        const json& regime = sim.at("variance_regime");
        manifest.regime_type = regime.at("type").get<std::string>();
        if (regime.contains("shape")) manifest.regime_shape = regime.at("shape").get<double>();
        if (regime.contains("scale_coef"))
            manifest.regime_scale_coef = regime.at("scale_coef").get<double>();
        if (regime.contains("z_coef")) manifest.regime_z_coef = regime.at("z_coef").get<double>();
        if (regime.contains("lo")) manifest.regime_lo = regime.at("lo").get<double>();
        if (regime.contains("hi")) manifest.regime_hi = regime.at("hi").get<double>();
    }
}

fhvar::HyperParams build_hyper(const Manifest& manifest, const fhvar::Dataset& dataset) {
    fhvar::HyperParams hyper;
    hyper.a = Eigen::VectorXd::Constant(dataset.m(), manifest.a_default);
    hyper.b.resize(dataset.m());
    if (manifest.b_rule == "inverse-n") {
        for (Eigen::Index i = 0; i < dataset.m(); ++i) {
            hyper.b(i) = 1.0 / static_cast<double>(dataset.n()(i));
        }
    } else if (manifest.b_rule.rfind("const:", 0) == 0) {
        const double value = fhvar::parse_double(manifest.b_rule.substr(6));
        hyper.b.setConstant(value);
    } else {
        throw fhvar::ValidationError("unknown b rule '" + manifest.b_rule +
                                     "' (expected inverse-n or const:<v>)");
    }
    return hyper;
}

fhvar::ModelSpec build_spec(const Manifest& manifest, const fhvar::Dataset& dataset) {
    fhvar::ModelSpec spec;
    spec.kind = fhvar::model_kind_from_string(manifest.model);
    spec.hyper = build_hyper(manifest, dataset);
    return spec;
}

fhvar::SamplerConfig build_sampler_config(const Manifest& manifest) {
    fhvar::SamplerConfig config;
    config.burn_in = manifest.burn_in;
    config.n_draws = manifest.draws;
    config.thin = manifest.thin;
    config.mh_step_c = manifest.mh_step;
    config.seed = manifest.seed;
    return config;
}

void validate_levels(const std::vector<double>& levels) {
    if (levels.empty()) {
        throw fhvar::ValidationError("at least one interval level is required");
    }
    for (double level : levels) {
        if (!(level > 0.0) || !(level < 1.0)) {
            throw fhvar::ValidationError("interval levels must lie strictly between 0 and 1");
        }
    }
}

int run_check(const Manifest& manifest) {
    const fhvar::Dataset dataset = fhvar::read_dataset_csv(manifest.input);
    const fhvar::ModelSpec spec = build_spec(manifest, dataset);
    const fhvar::ConditionReport report = fhvar::check_conditions(dataset, spec);
    std::cout << fhvar::condition_report_to_json(report) << "\n";
    std::cerr << fhvar::condition_report_to_text(report);
    if (spec.kind == fhvar::ModelKind::Stk2) {
        fhvar::validate_variance_covariates(dataset);
    }
    return report.proper ? kExitOk : kExitValidation;
}

int run_fit(const Manifest& manifest) {
    validate_levels(manifest.levels);
    const fhvar::Dataset dataset = fhvar::read_dataset_csv(manifest.input);
    const fhvar::ModelSpec spec = build_spec(manifest, dataset);
    const fhvar::SamplerConfig config = build_sampler_config(manifest);

    const fhvar::ChainResult chain = fhvar::run_chain(dataset, spec, config);
    const fhvar::Summary summary =
        fhvar::summarize(chain.draws, fhvar::quantile_levels_for_intervals(manifest.levels));
    const fhvar::DicResult dic = fhvar::dic(chain.draws, dataset, spec, manifest.jobs);

    fhvar::FitMeta meta;
    meta.model = manifest.model;
    meta.seed = config.seed;
    meta.burn_in = config.burn_in;
    meta.draws = config.n_draws;
    meta.thin = config.thin;
    meta.mh_accept_rate = chain.diagnostics.mh_accept_rate;
    meta.dic = dic.dic;
    meta.mean_deviance = dic.mean_deviance;

    fs::create_directories(manifest.out);
    const fs::path draws_path = fs::path(manifest.out) / "draws.csv";
    const fs::path summary_path = fs::path(manifest.out) / "summary.json";
    fhvar::write_draws_csv(draws_path, chain.draws);
    std::ofstream summary_out(summary_path, std::ios::binary);
    summary_out << fhvar::fit_summary_to_json(summary, manifest.levels, meta) << "\n";
    if (!summary_out.good()) {
        throw fhvar::ValidationError("failed while writing '" + summary_path.string() + "'");
    }

    std::cerr << "wrote " << draws_path.string() << " (" << chain.draws.n_draws() << " draws)\n";
    std::cerr << "wrote " << summary_path.string() << "\n";
    std::cerr << "DIC = " << dic.dic << ", mean deviance = " << dic.mean_deviance << "\n";
    if (chain.diagnostics.mh_accept_rate.has_value()) {
        std::cerr << "MH acceptance rate = " << *chain.diagnostics.mh_accept_rate << "\n";
    }
    return kExitOk;
}

int run_simulate(const Manifest& manifest) {
    fhvar::SimConfig config;
    config.m = manifest.sim_m;
    if (manifest.sim_n.size() == 1) {
        config.n = Eigen::VectorXi::Constant(config.m, manifest.sim_n.front());
    } else {
        config.n = Eigen::Map<const Eigen::VectorXi>(
            manifest.sim_n.data(), static_cast<Eigen::Index>(manifest.sim_n.size()));
    }
    config.beta0 = manifest.sim_beta0;
    config.beta1 = manifest.sim_beta1;
    config.tau2 = manifest.sim_tau2;
    config.z_range = manifest.z_range;
    config.replications = manifest.replications;
    config.seed = manifest.seed;
    if (manifest.regime_type == "inverse-gamma") {
        config.variance_regime = fhvar::IgRegime{manifest.regime_shape,
                                                 manifest.regime_scale_coef,
                                                 manifest.regime_z_coef};
    } else if (manifest.regime_type == "uniform") {
        config.variance_regime = fhvar::UniformRegime{manifest.regime_lo, manifest.regime_hi};
    } else {
        throw fhvar::ValidationError("unknown variance regime '" + manifest.regime_type +
                                     "' (expected inverse-gamma or uniform)");
    }

    // Hyperparameters for the fitted methods, sized to the generated data.
    fhvar::HyperParams hyper;
    hyper.a = Eigen::VectorXd::Constant(config.m, manifest.a_default);
    hyper.b.resize(config.m);
    for (Eigen::Index i = 0; i < config.m; ++i) {
        if (manifest.b_rule == "inverse-n") {
            hyper.b(i) = 1.0 / static_cast<double>(config.n(i));
        } else if (manifest.b_rule.rfind("const:", 0) == 0) {
            hyper.b(i) = fhvar::parse_double(manifest.b_rule.substr(6));
        } else {
            throw fhvar::ValidationError("unknown b rule '" + manifest.b_rule + "'");
        }
    }
    std::vector<fhvar::ModelSpec> methods;
    for (const std::string& name : manifest.methods) {
        methods.push_back({fhvar::model_kind_from_string(name), hyper});
    }

    const fhvar::ExperimentReport report =
        fhvar::run_experiment(config, methods, build_sampler_config(manifest), manifest.jobs);

    fs::create_directories(manifest.out);
    const fs::path csv_path = fs::path(manifest.out) / "report.csv";
    const fs::path json_path = fs::path(manifest.out) / "report.json";
    std::ofstream csv_out(csv_path, std::ios::binary);
    csv_out << fhvar::report_to_csv(report);
    std::ofstream json_out(json_path, std::ios::binary);
    json_out << fhvar::report_to_json(report) << "\n";
    if (!csv_out.good() || !json_out.good()) {
        throw fhvar::ValidationError("failed while writing the report files");
    }

    std::cout << fhvar::report_to_csv(report);
    std::cerr << "wrote " << csv_path.string() << " and " << json_path.string() << "\n";
    return kExitOk;
}

int run_summarize(const std::string& draws_path, const std::vector<double>& levels) {
    validate_levels(levels);
    const fhvar::DrawsTable table = fhvar::read_draws_csv(draws_path);
    const fhvar::Summary summary = fhvar::summarize_matrix(
        table.values, table.names, fhvar::quantile_levels_for_intervals(levels));
    std::cout << fhvar::bare_summary_to_json(summary, levels) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical Bayes small-area estimation with shrinkage of both means and "
                 "sampling variances"};
    app.require_subcommand(1);

    Manifest manifest;
    std::string config_path;

    const auto add_common = [&](CLI::App* cmd, bool sampler_flags) {
        cmd->add_option("--config", config_path, "JSON run manifest; flags override its values");
        cmd->add_option("--model", manifest.model, "Model: stk1, stk2, or yc");
        cmd->add_option("--a-default", manifest.a_default, "Constant prior shape a_i");
        cmd->add_option("--b-rule", manifest.b_rule, "Prior scale rule: inverse-n or const:<v>");
        if (sampler_flags) {
            cmd->add_option("--seed", manifest.seed, "RNG seed");
            cmd->add_option("--burn-in", manifest.burn_in, "Discarded initial sweeps");
            cmd->add_option("--draws", manifest.draws, "Retained draws");
            cmd->add_option("--thin", manifest.thin, "Keep every thin-th sweep");
            cmd->add_option("--mh-step", manifest.mh_step, "Random-walk proposal variance c");
            cmd->add_option("--levels", manifest.levels, "Credible-interval levels")
                ->delimiter(',');
            cmd->add_option("--out", manifest.out, "Output directory");
            cmd->add_option("--jobs", manifest.jobs, "Worker threads (0 = all cores)");
        }
    };

    CLI::App* check = app.add_subcommand("check", "Check posterior propriety conditions");
    check->add_option("input", manifest.input, "Area-level CSV")->required();
    add_common(check, false);

    CLI::App* fit = app.add_subcommand("fit", "Fit a model and write draws + summary");
    fit->add_option("input", manifest.input, "Area-level CSV")->required();
    add_common(fit, true);

    CLI::App* simulate = app.add_subcommand("simulate", "Run the Monte-Carlo comparison study");
    add_common(simulate, true);
    simulate->add_option("--replications", manifest.replications, "Replication count");

    CLI::App* summarize = app.add_subcommand("summarize", "Recompute a summary from stored draws");
    std::string draws_path;
    std::vector<double> summarize_levels{0.95, 0.99};
    summarize->add_option("draws", draws_path, "Draws CSV written by fit")->required();
    summarize->add_option("--levels", summarize_levels, "Credible-interval levels")
        ->delimiter(',');

    try {
        app.parse(argc, argv);

        if (check->parsed()) {
            apply_config(*check, config_path, manifest);
            return run_check(manifest);
        }
        if (fit->parsed()) {
            apply_config(*fit, config_path, manifest);
            return run_fit(manifest);
        }
        if (simulate->parsed()) {
            apply_config(*simulate, config_path, manifest);
            return run_simulate(manifest);
        }
        return run_summarize(draws_path, summarize_levels);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    } catch (const fhvar::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const fhvar::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
