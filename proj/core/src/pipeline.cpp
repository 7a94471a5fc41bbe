#include "hetfeed/pipeline.hpp"

#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "hetfeed/error.hpp"
#include "hetfeed/jsonl.hpp"
#include "hetfeed/manifest.hpp"
#include "hetfeed/text.hpp"

namespace hetfeed {

using nlohmann::json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::ingest: return "ingest";
    case Stage::unify: return "unify";
    case Stage::embed: return "embed";
    case Stage::cluster: return "cluster";
    case Stage::select: return "select";
  }
  return "unknown";
}

namespace {

template <typename Fn>
void run_stage(std::string_view name, Fn&& fn) {
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(std::string(name), e.kind(), e.what());
  } catch (const std::exception& e) {
    throw StageError(std::string(name), ErrorKind::runtime, e.what());
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::runtime, "cannot open " + path.string());
  return in;
}

void ingest(const RunConfig& cfg, PipelineResult& r) {
  json counts = json::object();
  ScoredRecordsBySource scored;
  std::vector<SourceDescriptor> descs;
  for (const auto& src : cfg.sources) {
    SourceData data{src, {}, {}};
    auto in = open_input(src.path);
    try {
      if (src.descriptor.supervision == Supervision::binary) {
        data.binary = parse_binary_dataset(in, src.descriptor);
        counts[src.descriptor.source_id] = data.binary.size();
      } else {
        data.scored = parse_scored_dataset(in, src.descriptor);
        counts[src.descriptor.source_id] = data.scored.size();
        scored[src.descriptor.source_id] = data.scored;
      }
    } catch (const ParseError& e) {
      throw ValidationError(src.path.string() + ": " + e.what());
    }
    descs.push_back(src.descriptor);
    r.sources.push_back(std::move(data));
  }
  auto violations = validate_sources(descs, scored);
  if (!violations.empty()) {
    std::string msg = "source validation failed:";
    for (const auto& v : violations) msg += "\n  " + v.source_id + ": " + v.message;
    throw ValidationError(msg);
  }
  r.log["ingest"] = json{{"records", counts}};
}

void unify(PipelineResult& r) {
  std::vector<std::pair<SourceDescriptor, std::vector<UnifiedPair>>> converted;
  json discards = json::object();
  for (const auto& src : r.sources) {
    const auto& desc = src.input.descriptor;
    if (desc.supervision == Supervision::binary) {
      converted.emplace_back(desc, convert_binary_source(src.binary, desc));
    } else {
      Conversion conv = convert_scored_source(src.scored, desc);
      r.discards[desc.source_id] = conv.discards;
      discards[desc.source_id] = to_json(conv.discards);
      converted.emplace_back(desc, std::move(conv.pairs));
    }
  }
  r.unified = union_sources(converted);
  json per_source = json::object();
  for (const auto& [id, n] : r.unified.per_source_counts) per_source[id] = n;
  r.log["unify"] = json{{"pairs", r.unified.pairs.size()},
                        {"per_source", per_source},
                        {"discards", discards}};
}

void embed(const RunConfig& cfg, PipelineResult& r) {
  std::vector<std::string> prompts;
  std::set<std::string> seen;
  for (const auto& p : r.unified.pairs) {
    if (seen.insert(normalize_prompt(p.prompt)).second) prompts.push_back(p.prompt);
  }
  std::unique_ptr<EmbeddingProvider> provider;
  if (cfg.embedding.provider == EmbeddingProviderKind::hash) {
    provider = std::make_unique<HashEmbeddingProvider>(cfg.embedding.dim, cfg.embedding.seed);
  } else {
    provider = std::make_unique<FileEmbeddingProvider>(cfg.embedding.path);
  }
  r.embeddings = provider->embed(prompts);
  const std::size_t dim = r.embeddings.empty() ? 0 : r.embeddings.begin()->second.dim();
  r.log["embed"] = json{
      {"provider", cfg.embedding.provider == EmbeddingProviderKind::hash ? "hash" : "file"},
      {"prompts", r.embeddings.size()},
      {"dim", dim}};
}

void cluster(const RunConfig& cfg, PipelineResult& r) {
  KMeansOptions opt;
  opt.k = cfg.selection.k;
  opt.restarts = cfg.selection.restarts;
  opt.seed = cfg.selection.seed;
  opt.max_iters = cfg.max_iters;
  r.model = kmeans_fit(r.embeddings, opt);
  r.log["cluster"] = json{{"k", r.model->k},
                          {"restarts", r.model->restarts_used},
                          {"seed", r.model->seed},
                          {"inertia", r.model->inertia}};
}

void select(const RunConfig& cfg, PipelineResult& r) {
  r.selection = select_pairs(r.unified.pairs, r.model->assignments, cfg.selection);
  const auto& rep = r.selection->report;
  r.log["select"] = json{{"fraction", rep.fraction},
                         {"pairs_in", rep.total_in},
                         {"pairs_out", rep.total_out},
                         {"achieved_fraction", rep.achieved_fraction()}};
}

}  // namespace

PipelineResult run_stages(const RunConfig& cfg, Stage last) {
  run_stage("config", [&] { cfg.validate(); });
  PipelineResult r;
  run_stage("ingest", [&] { ingest(cfg, r); });
  r.last_stage = Stage::ingest;
  if (last == Stage::ingest) return r;
  run_stage("unify", [&] { unify(r); });
  r.last_stage = Stage::unify;
  if (last == Stage::unify) return r;
  run_stage("embed", [&] { embed(cfg, r); });
  r.last_stage = Stage::embed;
  if (last == Stage::embed) return r;
  run_stage("cluster", [&] { cluster(cfg, r); });
  r.last_stage = Stage::cluster;
  if (last == Stage::cluster) return r;
  run_stage("select", [&] { select(cfg, r); });
  r.last_stage = Stage::select;
  return r;
}

PipelineOutputs run_pipeline(const RunConfig& cfg, Stage last, bool emit_manifests) {
  PipelineOutputs out;
  out.result = run_stages(cfg, last);
  const PipelineResult& r = out.result;
  const auto& dir = cfg.output_dir;

  auto emit = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    jsonl::write_file(path, content);
    out.files.push_back(path);
    return path;
  };

  try {
    run_stage("write", [&] {
      std::filesystem::create_directories(dir);
      json log = r.log;
      log["last_stage"] = to_string(r.last_stage);

      if (r.last_stage >= Stage::unify) {
        emit("unified.jsonl", serialize_pairs(r.unified.pairs));
        json discards = json::object();
        for (const auto& [id, d] : r.discards) discards[id] = to_json(d);
        emit("discard_report.json", discards.dump(2) + "\n");
      }
      if (r.last_stage >= Stage::embed) {
        std::ostringstream ss;
        write_embeddings(ss, r.embeddings);
        emit("embeddings.jsonl", ss.str());
      }
      if (r.last_stage >= Stage::cluster) {
        emit("cluster_model.json", to_json(*r.model).dump(2) + "\n");
      }
      if (r.last_stage >= Stage::select) {
        const std::string d_train = serialize_pairs(r.selection->pairs);
        out.d_train = emit("d_train.jsonl", d_train);
        out.selection_report =
            emit("selection_report.json", to_json(r.selection->report).dump(2) + "\n");
        log["d_train_sha256"] = sha256_hex(d_train);
        if (emit_manifests) {
          for (auto stage : {TrainingStage::sft, TrainingStage::reward, TrainingStage::rlhf}) {
            const auto m = emit_manifest(stage, out.d_train->filename().string());
            emit("manifest_" + std::string(to_string(stage)) + ".json",
                 to_json(m).dump(2) + "\n");
          }
        }
      }
      out.run_log = emit("run_log.json", log.dump(2) + "\n");
    });
  } catch (...) {
    std::error_code ec;
    for (const auto& f : out.files) std::filesystem::remove(f, ec);
    out.files.clear();
    throw;
  }
  return out;
}

eval::MetricReport run_eval(const std::filesystem::path& items_path,
                            const std::filesystem::path& dumps_path) {
  eval::MetricReport report;
  run_stage("eval", [&] {
    auto read = [](const std::filesystem::path& path, auto&& reader) {
      auto in = open_input(path);
      try {
        return reader(in);
      } catch (const ParseError& e) {
        throw ValidationError(path.string() + ": " + e.what());
      }
    };
    auto items = read(items_path, [](std::istream& in) { return eval::read_items(in); });
    auto dumps = read(dumps_path, [](std::istream& in) { return eval::read_dumps(in); });
    report = eval::evaluate(eval::EvalSet(std::move(items), dumps));
  });
  return report;
}

}  // namespace hetfeed
