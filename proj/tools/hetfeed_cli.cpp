// hetfeed: build a filtered preference dataset from heterogeneous sources,
// evaluate bias probe dumps, and emit training manifests.
//
// Exit codes: 0 ok, 1 usage, 2 validation, 3 runtime.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hetfeed/config.hpp"
#include "hetfeed/error.hpp"
#include "hetfeed/evalharness.hpp"
#include "hetfeed/jsonl.hpp"
#include "hetfeed/manifest.hpp"
#include "hetfeed/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> fraction;
  std::string out;
};

hetfeed::RunConfig load_config(const GlobalOptions& g) {
  if (g.config.empty()) throw hetfeed::ValidationError("--config is required");
  auto cfg = hetfeed::load_run_config(g.config);
  if (g.seed) cfg.selection.seed = *g.seed;
  if (g.fraction) cfg.selection.fraction = *g.fraction;
  if (!g.out.empty()) cfg.output_dir = g.out;
  return cfg;
}

void run_stage_command(const GlobalOptions& g, hetfeed::Stage stage, bool manifests) {
  const auto cfg = load_config(g);
  const auto out = hetfeed::run_pipeline(cfg, stage, manifests);
  for (const auto& f : out.files) std::cout << f.string() << '\n';
  if (out.result.selection) {
    const auto& rep = out.result.selection->report;
    std::cerr << "selected " << rep.total_out << " of " << rep.total_in
              << " pairs (fraction " << rep.fraction << ", achieved "
              << rep.achieved_fraction() << ")\n";
  }
}

void run_eval_command(const GlobalOptions& g, std::string items, std::string dumps,
                      const std::string& label) {
  if (items.empty() || dumps.empty()) {
    const auto cfg = load_config(g);
    if (!cfg.eval) throw hetfeed::ValidationError("no eval inputs given");
    if (items.empty()) items = cfg.eval->items.string();
    if (dumps.empty()) dumps = cfg.eval->dumps.string();
  }
  const auto report = hetfeed::run_eval(items, dumps);
  const auto doc = hetfeed::eval::to_json(report).dump(2) + "\n";
  const auto table = hetfeed::eval::format_table(report, label);
  std::cout << table << doc;
  if (!g.out.empty()) {
    std::filesystem::create_directories(g.out);
    hetfeed::jsonl::write_file(std::filesystem::path(g.out) / "metrics.json", doc);
    hetfeed::jsonl::write_file(std::filesystem::path(g.out) / "metrics.txt", table);
  }
}

void run_manifest_command(const GlobalOptions& g, const std::string& stage_name,
                          const std::string& dataset) {
  const auto stage = hetfeed::parse_training_stage(stage_name);
  const auto doc = hetfeed::to_json(hetfeed::emit_manifest(stage, dataset)).dump(2) + "\n";
  if (g.out.empty()) {
    std::cout << doc;
    return;
  }
  std::filesystem::path path(g.out);
  if (std::filesystem::is_directory(path)) path /= "manifest_" + stage_name + ".json";
  hetfeed::jsonl::write_file(path, doc);
  std::cout << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unify, filter and evaluate heterogeneous preference data"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Run config (JSON)");
  app.add_option("--seed", g.seed, "Override the selection/clustering seed");
  app.add_option("--fraction", g.fraction, "Override the selection fraction, in (0, 1]");
  app.add_option("--out", g.out, "Output directory (or manifest file)");

  struct StageCommand {
    const char* name;
    const char* help;
    hetfeed::Stage stage;
    bool manifests;
  };
  const StageCommand stage_commands[] = {
      {"ingest", "Parse and validate every source", hetfeed::Stage::ingest, false},
      {"unify", "Convert sources to preference pairs and take their union",
       hetfeed::Stage::unify, false},
      {"embed", "Embed the unified prompts", hetfeed::Stage::embed, false},
      {"cluster", "Fit k-means over prompt embeddings", hetfeed::Stage::cluster, false},
      {"select", "Select the training subset", hetfeed::Stage::select, false},
      {"pipeline", "Run every stage and emit training manifests",
       hetfeed::Stage::select, true},
  };
  for (const auto& sc : stage_commands) {
    app.add_subcommand(sc.name, sc.help)->callback([&g, sc] {
      run_stage_command(g, sc.stage, sc.manifests);
    });
  }

  std::string items, dumps, label = "model";
  auto* eval = app.add_subcommand("eval", "Compute bias and utility metrics from probe dumps");
  eval->add_option("--items", items, "Paired bias items (JSONL)");
  eval->add_option("--dumps", dumps, "Probe dumps (JSONL)");
  eval->add_option("--label", label, "Row label for the metrics table");
  eval->callback([&] { run_eval_command(g, items, dumps, label); });

  std::string stage_name, dataset;
  auto* manifest = app.add_subcommand("manifest", "Emit a training-stage manifest");
  manifest->add_option("--stage", stage_name, "sft, reward or rlhf")->required();
  manifest->add_option("--dataset", dataset, "Training dataset path")->required();
  manifest->callback([&] { run_manifest_command(g, stage_name, dataset); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const hetfeed::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == hetfeed::ErrorKind::runtime ? kExitRuntime : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
