#include <algorithm>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "srlnav/pipeline/stages.hpp"
#include "srlnav/pipeline/viz.hpp"

namespace pl = srlnav::pipeline;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("srlnav"));
  spdlog::cfg::load_env_levels();  // SPDLOG_LEVEL=debug|info|warn|...

  CLI::App app{"Representation learning + DDPG navigation pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  bool allow_mismatch = false;

  auto* gen = app.add_subcommand("gen-data", "Collect random-policy transitions into a dataset file");
  std::string gen_out;
  std::optional<std::size_t> gen_n;
  gen->add_option("--config", config_path, "Experiment config (JSON)")->required();
  gen->add_option("--out", gen_out, "Dataset file to write")->required();
  gen->add_option("--transitions", gen_n, "Override data.transitions");

  auto* srl_cmd = app.add_subcommand("train-srl", "Learn a state representation from a dataset");
  std::string srl_data, srl_out;
  srl_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  srl_cmd->add_option("--data", srl_data, "Dataset written by gen-data")->required();
  srl_cmd->add_option("--out", srl_out, "Output directory")->required();
  srl_cmd->add_flag("--allow-config-mismatch", allow_mismatch, "Accept upstream artifacts from another config");

  auto* rl_cmd = app.add_subcommand("train-rl", "Train DDPG on learned or true states, one run per seed");
  std::optional<std::string> rl_encoder;
  std::string rl_out;
  std::vector<std::uint64_t> rl_seeds;
  rl_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  rl_cmd->add_option("--encoder", rl_encoder, "train-srl output directory (omit for method=true_state)");
  rl_cmd->add_option("--out", rl_out, "Output directory")->required();
  rl_cmd->add_option("--seeds", rl_seeds, "Subset of the config seeds to run");
  rl_cmd->add_flag("--allow-config-mismatch", allow_mismatch, "Accept upstream artifacts from another config");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate trained agents without exploration noise");
  std::string eval_ckpt;
  std::optional<std::string> eval_out;
  eval_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  eval_cmd->add_option("--checkpoint", eval_ckpt, "train-rl output directory")->required();
  eval_cmd->add_option("--out", eval_out, "Output directory (default: <checkpoint>/eval)");
  eval_cmd->add_flag("--allow-config-mismatch", allow_mismatch, "Accept upstream artifacts from another config");

  auto* viz = app.add_subcommand("viz", "Render an SVG chart (plus a CSV of the plotted data)");
  std::string viz_kind, viz_out, viz_axis = "episodes";
  std::vector<std::string> viz_in;
  std::optional<std::string> viz_data;
  viz->add_option("--kind", viz_kind, "pca | success | traj")
      ->required()
      ->check(CLI::IsMember({"pca", "success", "traj"}));
  viz->add_option("--in", viz_in, "Input directory (success accepts several)")->required();
  viz->add_option("--out", viz_out, "SVG file to write")->required();
  viz->add_option("--data", viz_data, "Dataset to project (pca)");
  viz->add_option("--x-axis", viz_axis, "episodes | steps (success)")->check(CLI::IsMember({"episodes", "steps"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      pl::gen_data(pl::load_config(config_path), gen_out, gen_n);
    } else if (*srl_cmd) {
      pl::train_srl(pl::load_config(config_path), srl_data, srl_out, allow_mismatch);
    } else if (*rl_cmd) {
      std::optional<fs::path> enc;
      if (rl_encoder) enc = *rl_encoder;
      const auto cfg = pl::load_config(config_path);
      for (auto s : rl_seeds)
        if (std::find(cfg.seeds.begin(), cfg.seeds.end(), s) == cfg.seeds.end())
          throw pl::UsageError("--seeds value " + std::to_string(s) + " is not listed in the config seeds");
      pl::train_rl(cfg, enc, rl_out, allow_mismatch, rl_seeds);
    } else if (*eval_cmd) {
      const fs::path out = eval_out ? fs::path(*eval_out) : fs::path(eval_ckpt) / "eval";
      pl::evaluate(pl::load_config(config_path), eval_ckpt, out, allow_mismatch);
    } else if (*viz) {
      if (viz_kind != "success" && viz_in.size() != 1)
        throw pl::UsageError("--kind " + viz_kind + " takes exactly one --in directory");
      if (viz_kind == "pca") {
        if (!viz_data) throw pl::UsageError("--kind pca needs --data <dataset>");
        pl::viz_pca(viz_in[0], *viz_data, viz_out);
      } else if (viz_kind == "success") {
        std::vector<fs::path> dirs(viz_in.begin(), viz_in.end());
        pl::viz_success(dirs, viz_out, viz_axis == "steps" ? pl::XAxis::steps : pl::XAxis::episodes);
      } else {
        pl::viz_traj(viz_in[0], viz_out);
      }
    }
  } catch (const pl::UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
