#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "waylab/checkpoint.hpp"
#include "waylab/config.hpp"
#include "waylab/eval.hpp"
#include "waylab/plot.hpp"

namespace waylab {

/// Holds the run-directory lock for the duration of one pipeline run so
/// two invocations never write the same directory concurrently.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& run_dir) : file_(run_dir / "run.lock") {
        std::filesystem::create_directories(run_dir);
        if (std::filesystem::exists(file_)) {
            throw std::runtime_error("run directory is locked by another invocation: " +
                                     file_.string() + " (remove the lock if that run is dead)");
        }
        write_text_file(file_, "locked\n");
    }

    ~RunLock() {
        std::error_code ec;
        std::filesystem::remove(file_, ec);
    }

    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path file_;
};

struct PipelineArtifacts {
    std::filesystem::path run_dir;
    std::filesystem::path config_file;
    std::filesystem::path world_file;
    std::filesystem::path path_file;
    std::filesystem::path dataset_dir;
    std::filesystem::path checkpoint_file;
    std::filesystem::path loss_curve_file;
    std::filesystem::path report_file;
    std::vector<std::filesystem::path> trace_files;
    std::filesystem::path plot_file;
    std::string run_hash;  // content hash of the finished run directory
};

inline std::string loss_curve_csv(const std::vector<double>& losses) {
    std::string out = "epoch,mse\n";
    for (std::size_t e = 0; e < losses.size(); ++e) {
        out += std::to_string(e) + ',' + format_double(losses[e]) + '\n';
    }
    return out;
}

/// End-to-end run into <out_root>/<config-hash>: world, path, dataset,
/// training, closed-loop evaluation, and the plot, every artifact
/// reachable by relative path from the run directory.
inline PipelineArtifacts run_pipeline(const RunConfig& config,
                                      const std::filesystem::path& out_root,
                                      const std::function<void(const std::string&)>& log = {}) {
    config.validate();
    auto say = [&](const std::string& msg) {
        if (log) log(msg);
    };

    PipelineArtifacts artifacts;
    artifacts.run_dir = out_root / config_hash(config);
    RunLock lock(artifacts.run_dir);

    artifacts.config_file = artifacts.run_dir / "config.cfg";
    write_text_file(artifacts.config_file, canonical_config(config));

    say("world: generating " + std::to_string(config.world.block_count) + " blocks");
    const BlockWorld world = generate_world(config.world_seed, config.world);
    artifacts.world_file = artifacts.run_dir / "world.json";
    save_world(world, artifacts.world_file);

    const WaypointPath path = config.path.make();
    artifacts.path_file = artifacts.run_dir / "path.json";
    save_path(path, artifacts.path_file);
    say("path: " + path.id + ", " + format_double(path_distance(path)) + " m, angle change " +
        format_double(sum_angle_change(path)) + " rad");

    say("dataset: flying " + std::to_string(config.envelope.auxiliary_path_count) +
        " auxiliary paths");
    const Dataset dataset =
        build_dataset(path, world, config.envelope, config.camera, config.sim);
    artifacts.dataset_dir = artifacts.run_dir / "dataset";
    save_dataset(dataset, artifacts.dataset_dir);
    say("dataset: " + std::to_string(dataset.samples.size()) + " samples");

    say("train: " + config.train.variant + " for " +
        std::to_string(config.train.train.epochs) + " epochs");
    auto trained = train<float>(dataset, config.model_spec(), config.train.train);
    artifacts.checkpoint_file = artifacts.run_dir / "model.ckpt";
    save_checkpoint(trained.model, config.train.train, artifacts.checkpoint_file);
    artifacts.loss_curve_file = artifacts.run_dir / "loss_curve.csv";
    write_text_file(artifacts.loss_curve_file, loss_curve_csv(trained.epoch_loss));
    say("train: final epoch mse " + format_double(trained.epoch_loss.back()));

    say("eval: " + std::to_string(config.eval.trials) + " trials");
    const MetricsReport report =
        evaluate(trained.model, path, world, config.camera, config.sim, config.eval);
    artifacts.report_file = artifacts.run_dir / "report.csv";
    write_text_file(artifacts.report_file, report_to_csv(report));

    std::vector<RolloutTrace> traces;
    for (const auto& trial : report.trials) {
        if (trial.error) continue;
        const auto file =
            artifacts.run_dir / "traces" / ("trial_" + std::to_string(trial.trial) + ".csv");
        save_trace(trial.trace, file);
        artifacts.trace_files.push_back(file);
        traces.push_back(trial.trace);
    }

    artifacts.plot_file = artifacts.run_dir / "plot.svg";
    if (!traces.empty()) emit_path_plot(path, traces, artifacts.plot_file);

    const auto mwmd = report.mean_mwmd();
    const auto mctd = report.mean_mctd();
    say("eval: completed " + std::to_string(report.completed_trials()) + "/" +
        std::to_string(report.trials.size()) +
        (mwmd ? ", mwmd " + format_double(*mwmd) + " m" : "") +
        (mctd ? ", mctd " + format_double(*mctd) + " m" : ""));
    return artifacts;
}

/// Content hash over every file in the finished run directory.
inline std::string finish_pipeline(PipelineArtifacts& artifacts) {
    artifacts.run_hash = to_hex(hash_directory(artifacts.run_dir));
    return artifacts.run_hash;
}

}  // namespace waylab
