#include "hetfeed/config.hpp"

#include <set>

#include "hetfeed/error.hpp"
#include "hetfeed/jsonl.hpp"

namespace hetfeed {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return it->get<T>();
}

}  // namespace

void RunConfig::validate() const {
  std::vector<std::string> problems;
  if (sources.empty()) problems.push_back("no sources configured");

  std::vector<SourceDescriptor> descs;
  for (const auto& s : sources) descs.push_back(s.descriptor);
  for (const auto& v : validate_sources(descs)) {
    problems.push_back("source '" + v.source_id + "': " + v.message);
  }

  std::set<std::filesystem::path> paths;
  auto distinct = [&](const std::filesystem::path& p, const std::string& what) {
    if (p.empty()) return;
    if (!paths.insert(p.lexically_normal()).second) {
      problems.push_back(what + " path '" + p.string() + "' is used twice");
    }
  };
  for (const auto& s : sources) {
    if (s.path.empty()) problems.push_back("source '" + s.descriptor.source_id + "' has no path");
    distinct(s.path, "source");
  }
  if (embedding.provider == EmbeddingProviderKind::file) {
    if (embedding.path.empty()) problems.push_back("file embedding provider needs a path");
    distinct(embedding.path, "embedding");
  } else if (embedding.dim < 2) {
    problems.push_back("embedding dim must be >= 2");
  }
  if (eval) {
    distinct(eval->items, "eval items");
    distinct(eval->dumps, "eval dumps");
  }
  if (max_iters < 1) problems.push_back("max_iters must be >= 1");
  try {
    selection.validate();
  } catch (const ValidationError& e) {
    problems.push_back(e.what());
  }

  if (!problems.empty()) {
    std::string msg = "invalid run config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  RunConfig cfg;
  try {
    for (const auto& s : j.at("sources")) {
      SourceInput in;
      in.descriptor = source_descriptor_from_json(s);
      in.path = resolve(base_dir, s.at("path").get<std::string>());
      cfg.selection.policies[in.descriptor.source_id] = in.descriptor.filter_policy;
      cfg.sources.push_back(std::move(in));
    }

    const json emb = get_or<json>(j, "embedding", json::object());
    const auto provider = get_or<std::string>(emb, "provider", "hash");
    if (provider == "hash") {
      cfg.embedding.provider = EmbeddingProviderKind::hash;
    } else if (provider == "file") {
      cfg.embedding.provider = EmbeddingProviderKind::file;
      cfg.embedding.path = resolve(base_dir, emb.at("path").get<std::string>());
    } else {
      throw ValidationError("unknown embedding provider '" + provider + "'");
    }
    cfg.embedding.dim = get_or<std::size_t>(emb, "dim", kDefaultEmbeddingDim);
    cfg.embedding.seed = get_or<std::uint64_t>(emb, "seed", 0);

    const json sel = get_or<json>(j, "selection", json::object());
    cfg.selection.fraction = get_or<double>(sel, "fraction", 1.0);
    cfg.selection.k = get_or<std::size_t>(sel, "k", 10);
    cfg.selection.restarts = get_or<std::size_t>(sel, "restarts", 10);
    cfg.selection.seed = get_or<std::uint64_t>(sel, "seed", 0);
    cfg.max_iters = get_or<std::size_t>(sel, "max_iters", 100);

    cfg.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "out"));

    if (auto it = j.find("eval"); it != j.end() && !it->is_null()) {
      cfg.eval = EvalInputs{resolve(base_dir, it->at("items").get<std::string>()),
                            resolve(base_dir, it->at("dumps").get<std::string>())};
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = jsonl::read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError("config " + path.string() + " is not valid JSON");
  return run_config_from_json(j, path.parent_path());
}

}  // namespace hetfeed
