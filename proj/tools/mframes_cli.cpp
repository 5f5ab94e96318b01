// Command-line driver: sample splits, run classification tasks against a
// completion endpoint (or the built-in oracle double), rescore stored
// predictions, and inspect the completion cache.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mframes/client.hpp"
#include "mframes/corpus.hpp"
#include "mframes/errors.hpp"
#include "mframes/metrics.hpp"
#include "mframes/pipeline.hpp"
#include "mframes/prompts.hpp"
#include "mframes/runner.hpp"
#include "mframes/text.hpp"

namespace fs = std::filesystem;
using namespace mframes;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTransport = 4;

struct RunConfig {
  std::string corpus_path;
  std::string templates_dir;
  std::string definitions_path;
  std::string cache_dir;
  std::string output_dir = "out";

  std::string endpoint = "http://localhost:8080";
  std::string endpoint_path = "/v1/completions";
  std::string api_key_env = "MFRAMES_API_KEY";
  std::string client_kind = "http";  // http | oracle

  client::GenerationConfig gen;
  int shots = 5;
  int train_per_class = 10;
  int test_per_class = 20;
  std::uint64_t split_seed = 1;
  std::uint64_t tie_seed = 1;
  double threshold = 0.6;
  int concurrency = 4;
  std::size_t token_budget = prompts::kDefaultTokenBudget;
};

// Flat `key = value` config document; '#' starts a comment.
void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    try {
      if (key == "corpus") cfg.corpus_path = value;
      else if (key == "templates") cfg.templates_dir = value;
      else if (key == "definitions") cfg.definitions_path = value;
      else if (key == "cache") cfg.cache_dir = value;
      else if (key == "output") cfg.output_dir = value;
      else if (key == "endpoint") cfg.endpoint = value;
      else if (key == "endpoint_path") cfg.endpoint_path = value;
      else if (key == "api_key_env") cfg.api_key_env = value;
      else if (key == "client") cfg.client_kind = value;
      else if (key == "top_k") cfg.gen.top_k = std::stoi(value);
      else if (key == "temperature") cfg.gen.temperature = std::stod(value);
      else if (key == "num_seeds") cfg.gen.num_seeds = std::stoi(value);
      else if (key == "samples_per_seed")
        cfg.gen.samples_per_seed = std::stoi(value);
      else if (key == "max_new_tokens")
        cfg.gen.max_new_tokens = std::stoi(value);
      else if (key == "shots") cfg.shots = std::stoi(value);
      else if (key == "train_per_class")
        cfg.train_per_class = std::stoi(value);
      else if (key == "test_per_class") cfg.test_per_class = std::stoi(value);
      else if (key == "split_seed") cfg.split_seed = std::stoull(value);
      else if (key == "tie_seed") cfg.tie_seed = std::stoull(value);
      else if (key == "threshold") cfg.threshold = std::stod(value);
      else if (key == "concurrency") cfg.concurrency = std::stoi(value);
      else if (key == "token_budget")
        cfg.token_budget = std::stoull(value);
      else
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": unknown key: " + key);
    } catch (const std::invalid_argument&) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": bad value for " + key + ": " + value);
    }
  }
}

std::string config_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["corpus"] = cfg.corpus_path;
  j["client"] = cfg.client_kind;
  j["endpoint"] = cfg.endpoint;
  j["generation"] = nlohmann::json::parse(cfg.gen.to_json());
  j["shots"] = cfg.shots;
  j["train_per_class"] = cfg.train_per_class;
  j["test_per_class"] = cfg.test_per_class;
  j["split_seed"] = cfg.split_seed;
  j["tie_seed"] = cfg.tie_seed;
  j["threshold"] = cfg.threshold;
  j["concurrency"] = cfg.concurrency;
  j["token_budget"] = cfg.token_budget;
  return j.dump();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

// Test double that answers every prompt with the gold annotation; lets a
// full run be exercised without a completion service.
client::ScriptedClient::Responder oracle_responder(
    std::shared_ptr<corpus::Corpus> corpus) {
  return [corpus](const prompts::PromptInstance& prompt, int,
                  int) -> std::optional<std::string> {
    const corpus::AnnotatedItem* item = corpus->find(prompt.target_id);
    if (item == nullptr) return std::nullopt;
    switch (prompt.strategy) {
      case prompts::Strategy::MfOnePass:
      case prompts::Strategy::MfTieBreak:
        return std::string(taxonomy::name(item->foundation));
      case prompts::Strategy::MfOneVsAll:
        return item->foundation == *prompt.foundation
                   ? std::string(taxonomy::name(item->foundation))
                   : std::string(prompts::kOtherLabel);
      case prompts::Strategy::RoleOnePass:
      case prompts::Strategy::RolePositiveOnly:
        for (const auto& e : item->entities) {
          if (e.span == prompt.entity_span)
            return std::string(taxonomy::name(e.role));
        }
        return std::nullopt;
      case prompts::Strategy::RoleSentiment:
        for (const auto& e : item->entities) {
          if (e.span == prompt.entity_span) {
            return taxonomy::role_polarity(e.role) ==
                           taxonomy::Polarity::Negative
                       ? "negative"
                       : "positive";
          }
        }
        return std::nullopt;
      case prompts::Strategy::JointSlotFill: {
        std::string out;
        for (taxonomy::Role r : taxonomy::roles_of(*prompt.foundation)) {
          std::string value = prompts::kEmptySlot;
          for (const auto& e : item->entities) {
            if (e.role == r) {
              value = e.span;
              break;
            }
          }
          out += std::string(taxonomy::name(r)) + ": " + value + "\n";
        }
        return out;
      }
    }
    return std::nullopt;
  };
}

struct BuiltPipeline {
  std::shared_ptr<client::CompletionClient> base;
  std::shared_ptr<client::CompletionClient> client;
  std::unique_ptr<prompts::PromptRenderer> renderer;
  std::unique_ptr<pipeline::Pipeline> pipeline;
};

BuiltPipeline build_pipeline(const RunConfig& cfg,
                             std::shared_ptr<corpus::Corpus> corpus) {
  BuiltPipeline built;
  if (cfg.client_kind == "oracle") {
    auto scripted = std::make_shared<client::ScriptedClient>();
    scripted->set_responder(oracle_responder(std::move(corpus)));
    built.base = scripted;
  } else if (cfg.client_kind == "http") {
    client::HttpClientOptions opts;
    opts.base_url = cfg.endpoint;
    opts.path = cfg.endpoint_path;
    opts.api_key_env = cfg.api_key_env;
    built.base = std::make_shared<client::HttpCompletionClient>(opts);
  } else {
    throw ConfigError("unknown client kind: " + cfg.client_kind +
                      " (expected http or oracle)");
  }
  built.client = built.base;
  if (!cfg.cache_dir.empty()) {
    built.client =
        std::make_shared<client::DiskCacheClient>(built.base, cfg.cache_dir);
  }

  taxonomy::DefinitionCatalog catalog =
      cfg.definitions_path.empty()
          ? taxonomy::DefinitionCatalog::defaults()
          : taxonomy::DefinitionCatalog::load(cfg.definitions_path);
  prompts::TemplateSet templates =
      cfg.templates_dir.empty() ? prompts::TemplateSet::defaults()
                                : prompts::TemplateSet::load(cfg.templates_dir);
  built.renderer = std::make_unique<prompts::PromptRenderer>(
      std::move(catalog), std::move(templates), cfg.token_budget);

  pipeline::PipelineOptions popts;
  popts.gen = cfg.gen;
  popts.tie_seed = cfg.tie_seed;
  popts.match_threshold = cfg.threshold;
  built.pipeline = std::make_unique<pipeline::Pipeline>(
      *built.renderer, *built.client, popts);
  return built;
}

int cmd_sample(const RunConfig& cfg) {
  corpus::Corpus c = corpus::load_corpus(cfg.corpus_path);
  corpus::Split split = corpus::sample_split(c, cfg.train_per_class,
                                             cfg.test_per_class,
                                             cfg.split_seed);
  fs::path out(cfg.output_dir);
  write_file(out / "split_manifest.json", corpus::split_manifest(split));
  std::cout << "wrote " << (out / "split_manifest.json").string() << " ("
            << cfg.train_per_class << "/" << cfg.test_per_class
            << " per class, seed " << cfg.split_seed << ")\n";
  return kExitOk;
}

int cmd_classify(const RunConfig& cfg, const std::string& task_name) {
  auto task = runner::parse_task(task_name);
  if (!task) throw ConfigError("unknown task: " + task_name);
  runner::validate_shots(*task, cfg.shots);
  cfg.gen.validate();

  auto c = std::make_shared<corpus::Corpus>(corpus::load_corpus(cfg.corpus_path));
  corpus::Split split = corpus::sample_split(*c, cfg.train_per_class,
                                             cfg.test_per_class,
                                             cfg.split_seed);
  corpus::ShotSet shots =
      corpus::select_shots(split.train, cfg.shots, cfg.split_seed);

  BuiltPipeline built = build_pipeline(cfg, c);
  runner::RunResult result = runner::run_task(*task, split.test, shots,
                                              *built.pipeline, cfg.concurrency);

  fs::path out(cfg.output_dir);
  nlohmann::json manifest;
  manifest["task"] = task_name;
  manifest["config"] = nlohmann::json::parse(config_json(cfg));
  manifest["config_hash"] = text::digest_hex(config_json(cfg));
  manifest["corpus_hash"] = c->content_hash;
  manifest["template_hash"] = built.renderer->templates().content_hash();
  write_file(out / "manifest.json", manifest.dump(2) + "\n");
  write_file(out / "split_manifest.json", corpus::split_manifest(split));
  write_file(out / "traces.jsonl", result.traces);
  write_file(out / "predictions.jsonl", result.predictions);
  if (result.eval) {
    write_file(out / "report.json", result.eval->to_json() + "\n");
    write_file(out / "report.csv", result.eval->to_csv());
    std::cout << result.eval->to_table();
  }
  if (result.joint) {
    write_file(out / "report.json", result.joint->to_json() + "\n");
    std::cout << result.joint->to_table();
  }
  if (result.failed_items > 0) {
    std::cout << "items with per-item errors: " << result.failed_items << "\n";
  }
  std::cout << "outputs in " << out.string() << "\n";
  return kExitOk;
}

int cmd_score(const RunConfig& cfg, const std::string& pred_path,
              const std::string& kind) {
  std::ifstream in(pred_path, std::ios::binary);
  if (!in) throw DataError("cannot open prediction file: " + pred_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string preds = buf.str();

  if (kind == "joint") {
    metrics::JointReport rep = runner::score_joint(preds);
    std::cout << rep.to_table();
    if (!cfg.output_dir.empty())
      write_file(fs::path(cfg.output_dir) / "report.json",
                 rep.to_json() + "\n");
    return kExitOk;
  }
  std::vector<std::string> labels;
  if (kind == "foundation") {
    for (auto f : taxonomy::all_foundations())
      labels.emplace_back(taxonomy::name(f));
  } else if (kind == "role") {
    for (auto r : taxonomy::all_roles()) labels.emplace_back(taxonomy::name(r));
  } else {
    throw ConfigError("unknown label kind: " + kind +
                      " (expected foundation, role or joint)");
  }
  metrics::EvalReport rep = runner::score_classification(preds, labels);
  std::cout << rep.to_table();
  if (!cfg.output_dir.empty()) {
    write_file(fs::path(cfg.output_dir) / "report.json", rep.to_json() + "\n");
    write_file(fs::path(cfg.output_dir) / "report.csv", rep.to_csv());
  }
  return kExitOk;
}

int cmd_cache(const RunConfig& cfg, bool clear) {
  if (cfg.cache_dir.empty()) throw ConfigError("no cache directory configured");
  fs::path dir(cfg.cache_dir);
  if (!fs::exists(dir)) {
    std::cout << "cache " << dir.string() << " is empty\n";
    return kExitOk;
  }
  std::size_t count = 0;
  std::uintmax_t bytes = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    ++count;
    bytes += entry.file_size();
  }
  if (clear) {
    fs::remove_all(dir);
    std::cout << "cleared " << count << " cached completions\n";
  } else {
    std::cout << dir.string() << ": " << count << " completions, " << bytes
              << " bytes\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morality-frame identification via few-shot prompting"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", cfg.corpus_path, "corpus file (jsonl)");
    cmd->add_option("--templates", cfg.templates_dir, "template directory");
    cmd->add_option("--definitions", cfg.definitions_path,
                    "definition catalog file");
    cmd->add_option("--cache", cfg.cache_dir, "completion cache directory");
    cmd->add_option("--output", cfg.output_dir, "output directory");
    cmd->add_option("--split-seed", cfg.split_seed, "split sampling seed");
  };

  CLI::App* sample = app.add_subcommand("sample", "draw a train/test split");
  add_common(sample);
  sample->add_option("--train-per-class", cfg.train_per_class,
                     "training items per class");
  sample->add_option("--test-per-class", cfg.test_per_class,
                     "test items per class");

  std::string task_name;
  CLI::App* classify = app.add_subcommand("classify", "run a task");
  add_common(classify);
  classify->add_option("task", task_name,
                       "mf-one-pass | mf-ovr | role-one-pass | role-two-step "
                       "| joint")
      ->required();
  classify->add_option("-k,--shots", cfg.shots, "shots per class");
  classify->add_option("--train-per-class", cfg.train_per_class,
                       "training items per class");
  classify->add_option("--test-per-class", cfg.test_per_class,
                       "test items per class");
  classify->add_option("--client", cfg.client_kind, "http | oracle");
  classify->add_option("--endpoint", cfg.endpoint, "completion service URL");
  classify->add_option("--endpoint-path", cfg.endpoint_path,
                       "completion service POST path");
  classify->add_option("--api-key-env", cfg.api_key_env,
                       "env var holding the endpoint credential");
  classify->add_option("--top-k", cfg.gen.top_k, "top-k sampling parameter");
  classify->add_option("--temperature", cfg.gen.temperature,
                       "sampling temperature");
  classify->add_option("--num-seeds", cfg.gen.num_seeds,
                       "random seeds per prompt");
  classify->add_option("--samples-per-seed", cfg.gen.samples_per_seed,
                       "samples per seed");
  classify->add_option("--max-new-tokens", cfg.gen.max_new_tokens,
                       "generation length limit");
  classify->add_option("--tie-seed", cfg.tie_seed,
                       "seed for 3-plus-way tie resolution");
  classify->add_option("--threshold", cfg.threshold,
                       "entity match similarity threshold");
  classify->add_option("--concurrency", cfg.concurrency,
                       "max in-flight pipeline items");
  classify->add_option("--token-budget", cfg.token_budget,
                       "prompt token budget (0 = unlimited)");

  std::string pred_path;
  std::string label_kind = "foundation";
  CLI::App* score = app.add_subcommand("score", "rescore stored predictions");
  score->add_option("predictions", pred_path, "predictions.jsonl")->required();
  score->add_option("--labels", label_kind, "foundation | role | joint");
  score->add_option("--output", cfg.output_dir, "output directory");

  bool cache_clear = false;
  CLI::App* cache = app.add_subcommand("cache", "inspect or clear the cache");
  cache->add_option("--cache", cfg.cache_dir, "completion cache directory");
  cache->add_flag("--clear", cache_clear, "remove all cached completions");

  try {
    // config file values apply first, then flags override
    for (int i = 1; i + 1 < argc; ++i) {
      if (std::string(argv[i]) == "--config") {
        apply_config_file(argv[i + 1], cfg);
        break;
      }
    }
    app.parse(argc, argv);
    if (sample->parsed()) return cmd_sample(cfg);
    if (classify->parsed()) return cmd_classify(cfg, task_name);
    if (score->parsed()) return cmd_score(cfg, pred_path, label_kind);
    if (cache->parsed()) return cmd_cache(cfg, cache_clear);
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
