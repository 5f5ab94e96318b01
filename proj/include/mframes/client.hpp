#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mframes/prompts.hpp"

namespace mframes::client {

/// Decoding protocol. Defaults follow the reference setup: top-k 5
/// sampling at temperature 0.5, 5 seeds x 2 samples = 10 generations.
struct GenerationConfig {
  int top_k = 5;
  double temperature = 0.5;
  int num_seeds = 5;
  int samples_per_seed = 2;
  int max_new_tokens = 32;
  std::vector<std::string> stop_sequences;

  int total_generations() const { return num_seeds * samples_per_seed; }
  void validate() const;  // throws ConfigError
  std::string to_json() const;
};

enum class CompletionSource { Remote, Cache, Scripted };

struct Completion {
  std::string prompt_hash;
  int seed = 0;
  int sample_index = 0;
  std::string text;
  std::chrono::microseconds latency{0};
  CompletionSource source = CompletionSource::Remote;
};

/// Content-addressed key: digest of (prompt text, config, seed, sample).
std::string cache_key(const std::string& prompt_text,
                      const GenerationConfig& config, int seed,
                      int sample_index);

class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  /// One completion for (prompt, seed, sample_index). Safe to call from
  /// multiple threads.
  virtual Completion complete(const prompts::PromptInstance& prompt,
                              const GenerationConfig& config, int seed,
                              int sample_index) = 0;
};

/// num_seeds x samples_per_seed completions, ordered by (seed, sample).
std::vector<Completion> generate_all(CompletionClient& client,
                                     const prompts::PromptInstance& prompt,
                                     const GenerationConfig& config);

/// Deterministic test double. Lookup order: exact transcript key, then the
/// responder hook, then the default text; a miss throws TransportError.
class ScriptedClient : public CompletionClient {
 public:
  using Responder = std::function<std::optional<std::string>(
      const prompts::PromptInstance&, int seed, int sample_index)>;

  void script(const std::string& prompt_hash, int seed, int sample_index,
              std::string text);
  void set_default(std::string text) { default_text_ = std::move(text); }
  void set_responder(Responder r) { responder_ = std::move(r); }

  Completion complete(const prompts::PromptInstance& prompt,
                      const GenerationConfig& config, int seed,
                      int sample_index) override;

  int call_count() const { return call_count_; }
  void reset_call_count() { call_count_ = 0; }

 private:
  std::map<std::string, std::string> transcript_;
  std::optional<std::string> default_text_;
  Responder responder_;
  std::atomic<int> call_count_{0};
};

/// On-disk cache in front of another client; one file per completion,
/// named by the content-addressed key. Concurrent reads, serialized writes.
class DiskCacheClient : public CompletionClient {
 public:
  DiskCacheClient(std::shared_ptr<CompletionClient> inner, std::string dir);

  Completion complete(const prompts::PromptInstance& prompt,
                      const GenerationConfig& config, int seed,
                      int sample_index) override;

  int inner_calls() const { return inner_calls_; }

 private:
  std::shared_ptr<CompletionClient> inner_;
  std::string dir_;
  std::mutex write_mutex_;
  std::atomic<int> inner_calls_{0};
};

struct HttpClientOptions {
  std::string base_url = "http://localhost:8080";
  std::string path = "/v1/completions";
  std::string api_key_env = "MFRAMES_API_KEY";
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{250};
  std::chrono::milliseconds timeout{60000};
  bool send_seed = true;  // include the seed when the service supports it
};

/// HTTP POST completion client with bounded-backoff retries. The request
/// body carries prompt, temperature, top_k, max_tokens, n and optionally
/// seed; the response must carry a list of generated texts.
class HttpCompletionClient : public CompletionClient {
 public:
  explicit HttpCompletionClient(HttpClientOptions options);

  Completion complete(const prompts::PromptInstance& prompt,
                      const GenerationConfig& config, int seed,
                      int sample_index) override;

 private:
  HttpClientOptions options_;
};

}  // namespace mframes::client
