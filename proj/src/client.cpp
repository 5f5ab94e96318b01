#include "mframes/client.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <tuple>

#include "httplib.h"
#include "json.hpp"
#include "mframes/errors.hpp"
#include "mframes/text.hpp"

namespace mframes::client {

void GenerationConfig::validate() const {
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (temperature <= 0.0) throw ConfigError("temperature must be > 0");
  if (num_seeds < 1) throw ConfigError("num_seeds must be >= 1");
  if (samples_per_seed < 1)
    throw ConfigError("samples_per_seed must be >= 1");
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
}

std::string GenerationConfig::to_json() const {
  nlohmann::json j;
  j["top_k"] = top_k;
  j["temperature"] = temperature;
  j["num_seeds"] = num_seeds;
  j["samples_per_seed"] = samples_per_seed;
  j["max_new_tokens"] = max_new_tokens;
  j["stop_sequences"] = stop_sequences;
  return j.dump();
}

std::string cache_key(const std::string& prompt_text,
                      const GenerationConfig& config, int seed,
                      int sample_index) {
  std::string material = prompt_text;
  material += '\0';
  material += config.to_json();
  material += '\0';
  material += std::to_string(seed);
  material += '\0';
  material += std::to_string(sample_index);
  return text::digest_hex(material);
}

std::vector<Completion> generate_all(CompletionClient& client,
                                     const prompts::PromptInstance& prompt,
                                     const GenerationConfig& config) {
  config.validate();
  std::vector<Completion> out;
  out.reserve(static_cast<std::size_t>(config.total_generations()));
  for (int seed = 0; seed < config.num_seeds; ++seed) {
    for (int sample = 0; sample < config.samples_per_seed; ++sample) {
      Completion c = client.complete(prompt, config, seed, sample);
      c.prompt_hash = text::digest_hex(prompt.text);
      c.seed = seed;
      c.sample_index = sample;
      out.push_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end(), [](const Completion& a, const Completion& b) {
    return std::tie(a.seed, a.sample_index) < std::tie(b.seed, b.sample_index);
  });
  return out;
}

namespace {

std::string transcript_key(const std::string& prompt_hash, int seed,
                           int sample_index) {
  return prompt_hash + ":" + std::to_string(seed) + ":" +
         std::to_string(sample_index);
}

}  // namespace

void ScriptedClient::script(const std::string& prompt_hash, int seed,
                            int sample_index, std::string text) {
  transcript_[transcript_key(prompt_hash, seed, sample_index)] =
      std::move(text);
}

Completion ScriptedClient::complete(const prompts::PromptInstance& prompt,
                                    const GenerationConfig&, int seed,
                                    int sample_index) {
  ++call_count_;
  Completion c;
  c.seed = seed;
  c.sample_index = sample_index;
  c.source = CompletionSource::Scripted;
  std::string hash = text::digest_hex(prompt.text);
  auto it = transcript_.find(transcript_key(hash, seed, sample_index));
  if (it != transcript_.end()) {
    c.text = it->second;
    return c;
  }
  if (responder_) {
    if (auto r = responder_(prompt, seed, sample_index)) {
      c.text = *r;
      return c;
    }
  }
  if (default_text_) {
    c.text = *default_text_;
    return c;
  }
  throw TransportError("scripted client: no response for prompt " + hash +
                       " seed " + std::to_string(seed) + " sample " +
                       std::to_string(sample_index));
}

DiskCacheClient::DiskCacheClient(std::shared_ptr<CompletionClient> inner,
                                 std::string dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

Completion DiskCacheClient::complete(const prompts::PromptInstance& prompt,
                                     const GenerationConfig& config, int seed,
                                     int sample_index) {
  std::string key = cache_key(prompt.text, config, seed, sample_index);
  std::filesystem::path file = std::filesystem::path(dir_) / key;
  {
    std::ifstream in(file, std::ios::binary);
    if (in) {
      std::ostringstream buf;
      buf << in.rdbuf();
      Completion c;
      c.seed = seed;
      c.sample_index = sample_index;
      c.text = buf.str();
      c.source = CompletionSource::Cache;
      return c;
    }
  }
  Completion c;
  ++inner_calls_;
  c = inner_->complete(prompt, config, seed, sample_index);
  {
    std::lock_guard<std::mutex> lock(write_mutex_);
    // write-then-rename keeps concurrent readers off partial files
    std::filesystem::path tmp = file;
    tmp += ".tmp";
    std::ofstream out(tmp, std::ios::binary);
    out << c.text;
    out.close();
    std::filesystem::rename(tmp, file);
  }
  return c;
}

HttpCompletionClient::HttpCompletionClient(HttpClientOptions options)
    : options_(std::move(options)) {}

Completion HttpCompletionClient::complete(
    const prompts::PromptInstance& prompt, const GenerationConfig& config,
    int seed, int sample_index) {
  nlohmann::json body;
  body["prompt"] = prompt.text;
  body["temperature"] = config.temperature;
  body["top_k"] = config.top_k;
  body["max_tokens"] = config.max_new_tokens;
  body["n"] = 1;
  if (options_.send_seed) body["seed"] = seed;
  if (!config.stop_sequences.empty()) body["stop"] = config.stop_sequences;

  httplib::Client http(options_.base_url);
  http.set_connection_timeout(
      std::chrono::duration_cast<std::chrono::seconds>(options_.timeout));
  http.set_read_timeout(
      std::chrono::duration_cast<std::chrono::seconds>(options_.timeout));
  httplib::Headers headers;
  if (const char* key = std::getenv(options_.api_key_env.c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  auto start = std::chrono::steady_clock::now();
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(options_.backoff_base * (1 << (attempt - 1)));
    }
    auto res = http.Post(options_.path, headers, body.dump(),
                         "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "service error, status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("completion service rejected request, status " +
                           std::to_string(res->status) + ": " + res->body);
    }
    nlohmann::json payload;
    try {
      payload = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("unparseable service response: ") +
                           e.what());
    }
    std::string generated;
    if (payload.contains("texts") && payload["texts"].is_array() &&
        !payload["texts"].empty()) {
      generated = payload["texts"][0].get<std::string>();
    } else if (payload.contains("choices") && payload["choices"].is_array() &&
               !payload["choices"].empty()) {
      generated = payload["choices"][0].value("text", "");
    } else {
      throw TransportError("service response carries no generated texts");
    }
    Completion c;
    c.seed = seed;
    c.sample_index = sample_index;
    c.text = std::move(generated);
    c.latency = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start);
    c.source = CompletionSource::Remote;
    return c;
  }
  throw TransportError("completion request failed after " +
                       std::to_string(options_.max_attempts) +
                       " attempts: " + last_error);
}

}  // namespace mframes::client
