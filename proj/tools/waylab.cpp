// waylab: deterministic visual waypoint-following lab.
// Subcommands cover the full pipeline: world/path/dataset generation,
// regressor training, closed-loop evaluation, comparison tables, plots,
// and an end-to-end `pipeline` run keyed by the config hash.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "waylab/checkpoint.hpp"
#include "waylab/config.hpp"
#include "waylab/eval.hpp"
#include "waylab/pipeline.hpp"
#include "waylab/plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliContext {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    fs::path out_root = "out";
    bool quiet = false;
    bool json_output = false;
    json result;

    waylab::RunConfig load() const {
        if (!config_file.empty()) return waylab::load_config_file(config_file, seed);
        return waylab::default_config(seed);
    }

    void info(const std::string& msg) const {
        if (!quiet && !json_output) std::cout << msg << "\n";
    }

    void emit(const std::string& key, const json& value) {
        result[key] = value;
        if (!json_output && !quiet) {
            std::cout << key << ": "
                      << (value.is_string() ? value.get<std::string>() : value.dump()) << "\n";
        }
    }

    void flush() const {
        if (json_output) std::cout << result.dump(2) << "\n";
    }
};

void apply_env_overrides(CliContext& ctx) {
    if (const char* seed_env = std::getenv("WAYLAB_SEED"); seed_env && !ctx.seed) {
        ctx.seed = waylab::config_detail::parse_u64(seed_env);
    }
    if (const char* out_env = std::getenv("WAYLAB_OUT"); out_env && ctx.out_root == "out") {
        ctx.out_root = out_env;
    }
}

int run_world_gen(CliContext& ctx, const std::string& file) {
    const auto config = ctx.load();
    const auto world = waylab::generate_world(config.world_seed, config.world);
    const fs::path target = file.empty() ? ctx.out_root / "world.json" : fs::path(file);
    waylab::save_world(world, target);
    ctx.emit("world", target.string());
    ctx.emit("blocks", world.blocks.size());
    return 0;
}

int run_path_make(CliContext& ctx, const std::string& file) {
    const auto config = ctx.load();
    const auto path = config.path.make();
    const fs::path target = file.empty() ? ctx.out_root / (path.id + ".json") : fs::path(file);
    waylab::save_path(path, target);
    ctx.emit("path", target.string());
    ctx.emit("waypoints", path.size());
    ctx.emit("distance_m", waylab::path_distance(path));
    ctx.emit("sum_angle_change_rad", waylab::sum_angle_change(path));
    return 0;
}

int run_path_stats(CliContext& ctx, const std::string& file) {
    const auto path = waylab::load_path(file);
    ctx.emit("id", path.id);
    ctx.emit("waypoints", path.size());
    ctx.emit("distance_m", waylab::path_distance(path));
    ctx.emit("sum_angle_change_rad", waylab::sum_angle_change(path));
    return 0;
}

int run_dataset_build(CliContext& ctx, const std::string& world_file,
                      const std::string& path_file, const std::string& dir) {
    const auto config = ctx.load();
    const auto world = waylab::load_world(world_file);
    const auto path = waylab::load_path(path_file);
    const auto sim = waylab::resolve_sim(config.sim, path);
    const auto dataset = waylab::build_dataset(path, world, config.envelope, config.camera, sim);
    const fs::path target = dir.empty() ? ctx.out_root / "dataset" : fs::path(dir);
    waylab::save_dataset(dataset, target);
    ctx.emit("dataset", target.string());
    ctx.emit("samples", dataset.samples.size());
    ctx.emit("discarded_flights", dataset.manifest.discarded_flights);
    return 0;
}

int run_train(CliContext& ctx, const std::string& dataset_dir, const std::string& ckpt,
              const std::string& loss_file) {
    const auto config = ctx.load();
    const auto dataset = waylab::load_dataset(dataset_dir);
    waylab::ModelSpec spec = config.model_spec();
    spec.extractor.input_width = dataset.manifest.frame_width;
    spec.extractor.input_height = dataset.manifest.frame_height;
    ctx.info("training " + config.train.variant + " on " +
             std::to_string(dataset.samples.size()) + " samples");
    auto result = waylab::train<float>(dataset, spec, config.train.train);
    const fs::path target = ckpt.empty() ? ctx.out_root / "model.ckpt" : fs::path(ckpt);
    waylab::save_checkpoint(result.model, config.train.train, target);
    if (!loss_file.empty()) {
        waylab::write_text_file(loss_file, waylab::loss_curve_csv(result.epoch_loss));
    }
    ctx.emit("checkpoint", target.string());
    ctx.emit("final_mse", result.epoch_loss.back());
    return 0;
}

int run_eval(CliContext& ctx, const std::string& ckpt, const std::string& path_file,
             const std::string& world_file, const std::string& dir) {
    const auto config = ctx.load();
    const auto loaded = waylab::load_checkpoint(ckpt);
    const auto path = waylab::load_path(path_file);
    const auto world = waylab::load_world(world_file);
    const auto sim = waylab::resolve_sim(config.sim, path);
    const auto report =
        waylab::evaluate(loaded.model, path, world, config.camera, sim, config.eval);
    const fs::path target = dir.empty() ? ctx.out_root / "eval" : fs::path(dir);
    fs::create_directories(target);
    waylab::write_text_file(target / "report.csv", waylab::report_to_csv(report));
    std::vector<waylab::RolloutTrace> traces;
    for (const auto& trial : report.trials) {
        if (trial.error) continue;
        waylab::save_trace(trial.trace,
                           target / ("trial_" + std::to_string(trial.trial) + ".csv"));
        traces.push_back(trial.trace);
    }
    if (!traces.empty()) waylab::emit_path_plot(path, traces, target / "plot.svg");
    ctx.emit("report", (target / "report.csv").string());
    ctx.emit("completed_trials", report.completed_trials());
    if (const auto m = report.mean_mwmd()) ctx.emit("mwmd_m", *m);
    if (const auto m = report.mean_mctd()) ctx.emit("mctd_m", *m);
    return 0;
}

int run_compare(CliContext& ctx, const std::string& fcnn, const std::string& gru2,
                const std::string& gru4, const std::string& path_file,
                const std::string& world_file, const std::string& file) {
    const auto config = ctx.load();
    const auto path = waylab::load_path(path_file);
    const auto world = waylab::load_world(world_file);
    const auto sim = waylab::resolve_sim(config.sim, path);

    std::vector<std::pair<std::string, waylab::LoadedCheckpoint>> loaded;
    for (const auto& [name, ckpt] : std::vector<std::pair<std::string, std::string>>{
             {"fcnn", fcnn}, {"gru2", gru2}, {"gru4", gru4}}) {
        if (ckpt.empty()) {
            throw waylab::missing_checkpoint_error("compare: no checkpoint given for " + name +
                                                   " (--" + name + ")");
        }
        loaded.emplace_back(name, waylab::load_checkpoint(ckpt));
    }
    std::vector<std::pair<std::string, const waylab::Model<float>*>> variants;
    for (const auto& [name, l] : loaded) variants.emplace_back(name, &l.model);

    const auto rows =
        waylab::compare_regressors(variants, path, world, config.camera, sim, config.eval);
    const fs::path target = file.empty() ? ctx.out_root / "compare.csv" : fs::path(file);
    waylab::write_text_file(target, waylab::compare_to_csv(rows));
    ctx.emit("compare", target.string());
    ctx.emit("rows", rows.size());
    return 0;
}

int run_plot(CliContext& ctx, const std::string& path_file,
             const std::vector<std::string>& trace_files, const std::string& file) {
    const auto path = waylab::load_path(path_file);
    std::vector<waylab::RolloutTrace> traces;
    for (const auto& t : trace_files) traces.push_back(waylab::load_trace(t));
    const fs::path target = file.empty() ? ctx.out_root / "plot.svg" : fs::path(file);
    waylab::emit_path_plot(path, traces, target);
    ctx.emit("plot", target.string());
    return 0;
}

int run_full_pipeline(CliContext& ctx) {
    const auto config = ctx.load();
    auto artifacts = waylab::run_pipeline(config, ctx.out_root,
                                          [&](const std::string& msg) { ctx.info(msg); });
    waylab::finish_pipeline(artifacts);
    ctx.emit("run_dir", artifacts.run_dir.string());
    ctx.emit("run_hash", artifacts.run_hash);
    ctx.emit("report", artifacts.report_file.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"waylab: deterministic visual waypoint-following lab"};
    app.require_subcommand(1);

    CliContext ctx;
    std::uint64_t seed_flag = 0;
    app.add_option("--config", ctx.config_file, "run configuration file (key = value sections)");
    auto* seed_opt =
        app.add_option("--seed", seed_flag, "master seed (overrides config and WAYLAB_SEED)");
    app.add_option("--out", ctx.out_root, "output root directory (or WAYLAB_OUT)");
    app.add_flag("--quiet", ctx.quiet, "suppress informational output");
    app.add_flag("--json", ctx.json_output, "emit results as JSON");

    auto* world_cmd = app.add_subcommand("world", "world operations");
    world_cmd->require_subcommand(1);
    auto* world_gen = world_cmd->add_subcommand("gen", "generate a blocks world");
    std::string world_file;
    world_gen->add_option("--file", world_file, "output world.json");

    auto* path_cmd = app.add_subcommand("path", "path operations");
    path_cmd->require_subcommand(1);
    auto* path_make = path_cmd->add_subcommand("make", "emit a canonical test path");
    std::string path_file;
    path_make->add_option("--file", path_file, "output path.json");
    auto* path_stats = path_cmd->add_subcommand("stats", "print path statistics");
    std::string stats_file;
    path_stats->add_option("file", stats_file, "path json file")->required();

    auto* dataset_cmd = app.add_subcommand("dataset", "dataset operations");
    dataset_cmd->require_subcommand(1);
    auto* dataset_build = dataset_cmd->add_subcommand("build", "fly the envelope, record samples");
    std::string ds_world, ds_path, ds_dir;
    dataset_build->add_option("--world", ds_world, "world.json")->required();
    dataset_build->add_option("--path", ds_path, "path.json")->required();
    dataset_build->add_option("--dir", ds_dir, "output dataset directory");

    auto* train_cmd = app.add_subcommand("train", "train the regressor on a dataset");
    std::string tr_dataset, tr_ckpt, tr_loss;
    train_cmd->add_option("--dataset", tr_dataset, "dataset directory")->required();
    train_cmd->add_option("--ckpt", tr_ckpt, "output checkpoint");
    train_cmd->add_option("--loss-curve", tr_loss, "output per-epoch loss csv");

    auto* eval_cmd = app.add_subcommand("eval", "closed-loop evaluation of a checkpoint");
    std::string ev_ckpt, ev_path, ev_world, ev_dir;
    eval_cmd->add_option("--ckpt", ev_ckpt, "model checkpoint")->required();
    eval_cmd->add_option("--path", ev_path, "path.json")->required();
    eval_cmd->add_option("--world", ev_world, "world.json")->required();
    eval_cmd->add_option("--dir", ev_dir, "output directory");

    auto* compare_cmd = app.add_subcommand("compare", "regressor comparison table");
    std::string cp_fcnn, cp_gru2, cp_gru4, cp_path, cp_world, cp_file;
    compare_cmd->add_option("--fcnn", cp_fcnn, "FCNN checkpoint");
    compare_cmd->add_option("--gru2", cp_gru2, "GRU-2 checkpoint");
    compare_cmd->add_option("--gru4", cp_gru4, "GRU-4 checkpoint");
    compare_cmd->add_option("--path", cp_path, "path.json")->required();
    compare_cmd->add_option("--world", cp_world, "world.json")->required();
    compare_cmd->add_option("--file", cp_file, "output csv");

    auto* plot_cmd = app.add_subcommand("plot", "overhead svg of path and traces");
    std::string pl_path, pl_file;
    std::vector<std::string> pl_traces;
    plot_cmd->add_option("--path", pl_path, "path.json")->required();
    plot_cmd->add_option("--trace", pl_traces, "trace csv (repeatable)")->required();
    plot_cmd->add_option("--file", pl_file, "output svg");

    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "end-to-end run into a config-hash directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (seed_opt->count() > 0) ctx.seed = seed_flag;
    apply_env_overrides(ctx);

    try {
        int rc = 1;
        if (world_gen->parsed()) rc = run_world_gen(ctx, world_file);
        else if (path_make->parsed()) rc = run_path_make(ctx, path_file);
        else if (path_stats->parsed()) rc = run_path_stats(ctx, stats_file);
        else if (dataset_build->parsed()) rc = run_dataset_build(ctx, ds_world, ds_path, ds_dir);
        else if (train_cmd->parsed()) rc = run_train(ctx, tr_dataset, tr_ckpt, tr_loss);
        else if (eval_cmd->parsed()) rc = run_eval(ctx, ev_ckpt, ev_path, ev_world, ev_dir);
        else if (compare_cmd->parsed())
            rc = run_compare(ctx, cp_fcnn, cp_gru2, cp_gru4, cp_path, cp_world, cp_file);
        else if (plot_cmd->parsed()) rc = run_plot(ctx, pl_path, pl_traces, pl_file);
        else if (pipeline_cmd->parsed()) rc = run_full_pipeline(ctx);
        ctx.flush();
        return rc;
    } catch (const waylab::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
