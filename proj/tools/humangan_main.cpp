// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "humangan/commands.hpp"
#include "humangan/errors.hpp"

namespace {

using namespace humangan;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> iterations;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_out) {
    cmd->add_option("--config", c.config, "INI configuration file (defaults apply when omitted)");
    cmd->add_option("--out", c.out, "Output directory")->default_val(default_out);
    cmd->add_option("--seed", c.seed, "Master seed; overrides [run] seed");
}

ExperimentConfig resolve(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? parse_config("", c.seed) : load_config(c.config, c.seed);
    if (c.iterations) {
        cfg.train.iterations = *c.iterations;
        cfg.validate();
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HumanGAN training engine: perception-driven generator training with pairwise raters"};
    app.require_subcommand(1);

    Common sim_c, survey_c, base_c, serve_c, export_c, import_c;
    bool sim_resume = false;
    std::optional<std::string> base_humangan, serve_resume;
    std::optional<int> serve_port;
    std::string import_csv, project_in, project_out = "projection";
    std::size_t project_k = 2;

    auto* sim = app.add_subcommand("simulate", "Train against a simulated perceptual field");
    add_common(sim, sim_c, "runs/simulate");
    sim->add_option("--iterations", sim_c.iterations, "Override [train] iterations");
    sim->add_flag("--resume", sim_resume, "Continue the run already in --out");

    auto* survey = app.add_subcommand("survey", "Rate a grid of points with simulated absolute raters");
    add_common(survey, survey_c, "runs/survey");

    auto* base = app.add_subcommand("baseline", "Train the basic GAN on standard-Gaussian data");
    add_common(base, base_c, "runs/baseline");
    base->add_option("--humangan", base_humangan, "HumanGAN run directory to compare against");

    auto* serve = app.add_subcommand("serve", "Human-mode training behind the HTTP rating API");
    add_common(serve, serve_c, "runs/serve");
    serve->add_option("--iterations", serve_c.iterations, "Override [train] iterations");
    serve->add_option("--port", serve_port, "HTTP port; overrides [serve] port (0 picks a free port)");
    serve->add_option("--resume", serve_resume, "Snapshot checkpoint or run directory to resume from");

    auto* exp = app.add_subcommand("export", "Write the pending human-mode batch as CSV for offline raters");
    add_common(exp, export_c, "runs/serve");

    auto* imp = app.add_subcommand("import", "Store offline responses for the pending human-mode batch");
    add_common(imp, import_c, "runs/serve");
    imp->add_option("csv", import_csv, "query_id,rater_id,score CSV")->required();

    auto* proj = app.add_subcommand("project", "Fit a PCA projection to a vector CSV");
    proj->add_option("input", project_in, "Input CSV")->required();
    proj->add_option("--components", project_k, "Target dimension")->default_val(2);
    proj->add_option("--out", project_out, "Output directory")->default_val("projection");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sim) {
            cmd_simulate(resolve(sim_c), sim_c.out, std::cout, sim_resume);
        } else if (*survey) {
            cmd_survey(resolve(survey_c), survey_c.out, std::cout);
        } else if (*base) {
            std::optional<std::filesystem::path> h;
            if (base_humangan) h = *base_humangan;
            cmd_baseline(resolve(base_c), base_c.out, std::cout, h);
        } else if (*serve) {
            ExperimentConfig cfg = resolve(serve_c);
            if (serve_port) cfg.serve.port = *serve_port;
            cfg.validate();
            ServeOptions opts;
            if (serve_resume) opts.resume = *serve_resume;
            cmd_serve(cfg, serve_c.out, std::cout, opts);
        } else if (*exp) {
            cmd_export(resolve(export_c), export_c.out, std::cout);
        } else if (*imp) {
            const auto report = cmd_import(resolve(import_c), import_c.out, import_csv, std::cout);
            if (!report.errors.empty()) return kExitConfig;
        } else if (*proj) {
            cmd_project(project_in, project_k, project_out, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kExitOk;
}
