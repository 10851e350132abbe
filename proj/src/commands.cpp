// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/commands.hpp"

#include <cstdlib>
#include <ctime>
#include <ostream>
#include <random>
#include <sstream>

#include "humangan/errors.hpp"
#include "humangan/http_api.hpp"
#include "humangan/run_io.hpp"

namespace humangan {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const InitializationError*>(&e))
        return kExitConfig;
    if (dynamic_cast<const DivergenceError*>(&e)) return kExitDivergence;
    if (dynamic_cast<const TrainingSuspended*>(&e) || dynamic_cast<const IncompleteBatchError*>(&e))
        return kExitIncomplete;
    if (dynamic_cast<const StartupError*>(&e)) return kExitStartup;
    return kExitFailure;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::pair<std::string, std::uint64_t>> resolved_seeds(const ExperimentConfig& cfg) {
    return {{"master", cfg.seed},
            {"prior", cfg.train.prior_seed},
            {"nes", cfg.train.nes.seed},
            {"generator", cfg.generator.seed},
            {"rater", cfg.rater.seed},
            {"eval", cfg.eval_rater.seed},
            {"survey", cfg.survey.rater.seed},
            {"baseline", cfg.baseline.gan.seed}};
}

std::string format_manifest(const RunManifest& m) {
    std::ostringstream os;
    os << "humangan-run-manifest v1\n"
       << "command = " << m.command << '\n'
       << "output_dir = " << m.output_dir.string() << '\n'
       << "started_at = " << m.started_at << '\n'
       << "finished_at = " << m.finished_at << '\n';
    for (const auto& [name, seed] : m.seeds) os << "seed." << name << " = " << seed << '\n';
    os << "config =\n" << m.config_text;
    return os.str();
}

void write_manifest(const RunManifest& m) {
    fs::create_directories(m.output_dir);
    write_text_file(m.output_dir / "manifest.txt", format_manifest(m));
    write_text_file(m.output_dir / "config.ini", m.config_text);
}

namespace {

RunManifest begin_manifest(const std::string& command, const ExperimentConfig& cfg, const fs::path& out) {
    cfg.validate();
    fs::create_directories(out);
    RunManifest m{command, format_config(cfg), out, resolved_seeds(cfg), utc_timestamp(), ""};
    write_manifest(m);
    return m;
}

void finish_manifest(RunManifest& m) {
    m.finished_at = utc_timestamp();
    write_manifest(m);
}

void write_metrics(const fs::path& out, const TrainingRun& run, std::span<const SnapshotEval> evals) {
    std::ostringstream os;
    write_metrics_csv(os, run, evals);
    write_text_file(out / "metrics.csv", os.str());
}

void report_warnings(const fs::path& out, std::span<const PathologyWarning> warnings, std::ostream& log) {
    std::ostringstream os;
    os << "iteration,kind,detail\n";
    for (const auto& w : warnings) {
        os << w.iteration << ',' << to_string(w.kind) << ",\"" << w.detail << "\"\n";
        log << "warning: " << to_string(w.kind) << " at iteration " << w.iteration << ": " << w.detail << '\n';
    }
    write_text_file(out / "warnings.csv", os.str());
}

GeneratorParams initial_generator(const ExperimentConfig& cfg, const AcceptancePredicate& accept, std::size_t& attempts) {
    const auto prior = sample_prior(cfg.train.n, cfg.generator.d_z, cfg.train.prior_seed);
    InitResult init = init_params(cfg.generator, accept, prior, cfg.init.max_attempts);
    attempts = init.attempts;
    return std::move(init.params);
}

double density_threshold(const ExperimentConfig& cfg) {
    FeatureVector at = FeatureVector::Zero(static_cast<Eigen::Index>(cfg.generator.d_x));
    at[0] = cfg.baseline.density_radius;
    return standard_gaussian_density(at);
}

}  // namespace

SimulateReport cmd_simulate(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log, bool resume) {
    RunManifest manifest = begin_manifest("simulate", cfg, out);
    SimulatedDiscriminator disc(cfg.field, cfg.rater, cfg.threads);
    const TrainOptions opts{out};

    SimulateReport report;
    if (resume && fs::exists(snapshot_path(out, 0))) {
        report.run = load_run(out);
        report.run.config.iterations = cfg.train.iterations;
        log << "resuming " << out.string() << " after iteration " << report.run.completed_iterations() << '\n';
    } else {
        const GeneratorParams g0 = initial_generator(cfg, make_init_predicate(cfg), report.init_attempts);
        log << "initial generator accepted after " << report.init_attempts << " attempt(s)\n";
        report.run = start_run(g0, cfg.train, disc, cfg.generator.seed, opts);
    }
    continue_run(report.run, disc, opts);

    report.evals = evaluate_run(report.run, cfg.field, cfg.eval_rater);
    write_metrics(out, report.run, report.evals);
    for (const auto& e : report.evals)
        log << "iteration " << e.iteration << ": closed mean " << format_double(e.closed.stats.mean) << ", open mean "
            << format_double(e.open.stats.mean) << '\n';
    report.warnings = detect_pathologies(report.run);
    report_warnings(out, report.warnings, log);
    log << "queries used: " << report.run.snapshots.back().query_count << '\n';
    finish_manifest(manifest);
    return report;
}

PosteriorGrid cmd_survey(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    RunManifest manifest = begin_manifest("survey", cfg, out);
    const PosteriorGrid grid = grid_survey(cfg.field, cfg.survey.bounds, cfg.survey.resolution, cfg.survey.rater);
    std::ostringstream os;
    write_grid_csv(os, grid);
    write_text_file(out / "grid.csv", os.str());
    log << "surveyed " << grid.values.size() << " cells of " << describe(cfg.field) << '\n';
    finish_manifest(manifest);
    return grid;
}

std::vector<FeatureVector> baseline_real_data(const ExperimentConfig& cfg) {
    std::mt19937_64 rng(mix_seed(cfg.baseline.gan.seed, 0x7265616cULL));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<FeatureVector> real(cfg.baseline.real_count);
    for (auto& x : real) {
        x.resize(static_cast<Eigen::Index>(cfg.generator.d_x));
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = normal(rng);
    }
    return real;
}

GeneratorConfig baseline_generator_config(const ExperimentConfig& cfg) {
    GeneratorConfig g = cfg.generator;
    g.init_scale = cfg.baseline.g_init_scale;
    g.seed = mix_seed(cfg.baseline.gan.seed, 0x67656eULL);
    return g;
}

BaselineReport cmd_baseline(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log,
                            const std::optional<fs::path>& humangan_run) {
    if (cfg.baseline.real_count < cfg.baseline.gan.batch_size)
        throw ValidationError("baseline real_count (" + std::to_string(cfg.baseline.real_count) +
                              ") is smaller than batch_size (" + std::to_string(cfg.baseline.gan.batch_size) + ")");
    RunManifest manifest = begin_manifest("baseline", cfg, out);

    BaselineReport report;
    report.real = baseline_real_data(cfg);
    const GeneratorConfig g_cfg = baseline_generator_config(cfg);
    report.gan = train_basic_gan(report.real, g_cfg, cfg.baseline.gan);
    const auto z = sample_prior(cfg.baseline.real_count, g_cfg.d_z, mix_seed(cfg.baseline.gan.seed, 0x73616dULL));
    report.samples = forward(report.gan.generator, z);
    report.density_threshold = density_threshold(cfg);
    report.outside_mass =
        outside_mass(report.samples, cfg.field, report.density_threshold, cfg.baseline.posterior_threshold);

    std::ostringstream samples, history, real;
    write_points_csv(samples, report.samples);
    write_points_csv(real, report.real);
    write_history_csv(history, report.gan.history);
    write_text_file(out / "samples.csv", samples.str());
    write_text_file(out / "real.csv", real.str());
    write_text_file(out / "history.csv", history.str());

    std::ostringstream mass;
    mass << "source,samples,outside_mass\n"
         << "baseline," << report.samples.size() << ',' << format_double(report.outside_mass) << '\n';
    log << "baseline outside_mass " << format_double(report.outside_mass) << '\n';
    if (humangan_run) {
        const TrainingRun run = load_run(*humangan_run);
        const auto& points = run.snapshots.back().points;
        report.humangan_outside_mass =
            outside_mass(points, cfg.field, report.density_threshold, cfg.baseline.posterior_threshold);
        mass << "humangan," << points.size() << ',' << format_double(*report.humangan_outside_mass) << '\n';
        log << "humangan outside_mass " << format_double(*report.humangan_outside_mass) << '\n';
    }
    write_text_file(out / "outside_mass.csv", mass.str());
    finish_manifest(manifest);
    return report;
}

fs::path service_data_dir(const ExperimentConfig& cfg, const fs::path& out) {
    if (const char* env = std::getenv("HUMANGAN_DATA_DIR"); env && *env) return env;
    if (!cfg.serve.data_dir.empty()) return cfg.serve.data_dir;
    return out / "service";
}

namespace {

QueryServiceOptions service_options(const ExperimentConfig& cfg, const fs::path& out) {
    QueryServiceOptions o;
    o.data_dir = service_data_dir(cfg, out);
    o.assignment_timeout =
        std::chrono::milliseconds(static_cast<std::int64_t>(cfg.serve.assignment_timeout_s * 1000.0));
    return o;
}

// A snapshot file (run/snapshots/snapshot_NNNN.ckpt) or a run directory.
TrainingRun load_resume_point(const fs::path& resume) {
    if (fs::is_directory(resume)) return load_run(resume);
    const auto ckpt = load_checkpoint(resume);
    const std::size_t through = std::stoull(ckpt.get("completed_iterations"));
    return load_run(resume.parent_path().parent_path(), through);
}

TrainingRun run_for_service(const fs::path& out) {
    if (!fs::exists(snapshot_path(out, 0)))
        throw ValidationError("no human-mode run in " + out.string() + "; start one with `humangan serve`");
    TrainingRun run = load_run(out);
    if (run.completed_iterations() >= run.config.iterations)
        throw ValidationError("run in " + out.string() + " is already complete");
    return run;
}

}  // namespace

TrainingRun cmd_serve(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log, const ServeOptions& opts) {
    RunManifest manifest = begin_manifest("serve", cfg, out);
    QueryService service(service_options(cfg, out));
    HumanDiscriminator disc(service, cfg.serve.raters_per_query,
                            std::chrono::milliseconds(static_cast<std::int64_t>(cfg.serve.batch_timeout_s * 1000.0)));
    const TrainOptions train_opts{out};

    TrainingRun run;
    if (opts.resume) {
        run = load_resume_point(*opts.resume);
        run.config.iterations = cfg.train.iterations;
        if (fs::weakly_canonical(*opts.resume) != fs::weakly_canonical(out))
            for (const auto& rec : run.snapshots) write_snapshot(out, run, rec);
        log << "resuming after iteration " << run.completed_iterations() << '\n';
    } else {
        // Human mode has no field to screen the initial generator with.
        std::size_t attempts = 0;
        const GeneratorParams g0 =
            initial_generator(cfg, [](const std::vector<FeatureVector>&) { return true; }, attempts);
        run = start_run(g0, cfg.train, disc, cfg.generator.seed, train_opts);
    }

    TrainingStatus status;
    status.state = "waiting";
    status.iteration = run.completed_iterations();
    status.iterations = run.config.iterations;
    status.budget = query_budget(run.config.iterations, run.config.n, run.config.nes.r);
    status.answered = run.snapshots.back().query_count;
    service.set_training_status(status);

    ServiceServer server(service);
    server.start(cfg.serve.host, cfg.serve.port);
    log << "serving on " << cfg.serve.host << ':' << server.port() << ", data in "
        << service_data_dir(cfg, out).string() << '\n';
    if (opts.on_ready) opts.on_ready(server.port());

    try {
        continue_run(run, disc, train_opts);
    } catch (const TrainingSuspended&) {
        write_metrics(out, run, {});
        finish_manifest(manifest);
        server.stop();
        throw;
    }
    status = service.training_status();
    status.state = "done";
    status.iteration = run.completed_iterations();
    status.answered = run.snapshots.back().query_count;
    service.set_training_status(status);
    write_metrics(out, run, {});
    log << "training complete after " << run.completed_iterations() << " iteration(s)\n";
    server.stop();
    finish_manifest(manifest);
    return run;
}

fs::path cmd_export(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    const TrainingRun run = run_for_service(out);
    const IterationBatch batch = next_batch(run);
    QueryService service(service_options(cfg, out));
    const BatchManifest m = service.open_batch(batch.iteration, batch.queries, cfg.serve.raters_per_query);
    const fs::path path = out / "exports" / (m.batch_id + ".csv");
    fs::create_directories(path.parent_path());
    write_text_file(path, service.export_batch(m.batch_id));
    log << "exported " << m.query_ids.size() << " queries of iteration " << batch.iteration << " to " << path.string()
        << '\n';
    return path;
}

ImportReport cmd_import(const ExperimentConfig& cfg, const fs::path& out, const fs::path& csv, std::ostream& log) {
    const TrainingRun run = run_for_service(out);
    const IterationBatch batch = next_batch(run);
    QueryService service(service_options(cfg, out));
    const BatchManifest m = service.open_batch(batch.iteration, batch.queries, cfg.serve.raters_per_query);
    const ImportReport report = service.import_responses_file(csv);
    for (const auto& e : report.errors) log << csv.string() << ':' << e.line << ": " << e.message << '\n';
    const BatchStatus st = service.batch_status(m.batch_id);
    log << "applied " << report.applied << " response(s), skipped " << report.duplicates << " duplicate(s); batch "
        << m.batch_id << " has " << st.complete_queries << " of " << st.queries << " queries complete\n";
    return report;
}

ProjectionModel cmd_project(const fs::path& input, std::size_t components, const fs::path& out, std::ostream& log) {
    const Dataset data = load_vectors(input);
    const ProjectionModel model = fit_projection(data, components);
    fs::create_directories(out);
    std::ostringstream projected;
    write_points_csv(projected, project(model, data));
    write_text_file(out / "projected.csv", projected.str());
    write_text_file(out / "projection.txt", format_projection(model));
    log << "projected " << data.rows.size() << " rows from " << data.dim() << " to " << components << " dimensions\n";
    return model;
}

}  // namespace humangan
