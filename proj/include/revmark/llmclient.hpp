#pragma once

#include "revmark/watermark.hpp"

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace revmark {

struct ProviderConfig {
  std::string endpoint_url;
  std::string model_name;
  std::string auth_env_var = "OPENAI_API_KEY";
  std::size_t max_retries = 3;
  double timeout = 60.0;  // seconds
  double temperature = 1.0;

  void validate() const;
};

// key=value file with the ProviderConfig field names.
ProviderConfig load_provider_config(const std::string& path);

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  std::size_t n = 1;

  // Compact JSON with sorted keys; this is also the wire body.
  std::string canonical() const;
  // Hex SHA-256 of canonical().
  std::string key() const;
};

struct HttpResponse {
  long status = 0;
  std::string body;
};

// Sends one POST; implementations throw ProviderError on transport failure.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const std::vector<std::string>& headers, double timeout) = 0;
};

// libcurl-backed transport. Honors the usual proxy environment variables.
std::unique_ptr<Transport> make_curl_transport();

enum class CassetteMode { Replay, Record };

// JSON lines: {"key", "request", "response"}. Replay never touches the network.
class Cassette {
 public:
  static Cassette load(const std::string& path, CassetteMode mode = CassetteMode::Replay);

  const std::string& path() const noexcept { return path_; }
  CassetteMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::string* find(const std::string& key) const;
  // Record mode only; appends to the file.
  void record(const ChatRequest& request, const std::string& response_body);

 private:
  std::string path_;
  CassetteMode mode_ = CassetteMode::Replay;
  std::map<std::string, std::string> records_;
};

class LlmClient {
 public:
  // A replay cassette makes the client offline; otherwise the transport is
  // used (curl by default) and the credential must be present.
  LlmClient(ProviderConfig cfg, Cassette* cassette = nullptr, std::unique_ptr<Transport> transport = nullptr);

  std::vector<std::string> complete(const ChatRequest& request);

  const ProviderConfig& config() const noexcept { return cfg_; }
  std::size_t network_calls() const noexcept { return network_calls_; }
  // Replaced in tests to avoid real waits between retries.
  std::function<void(std::chrono::milliseconds)> sleep;

 private:
  std::string send(const ChatRequest& request);

  ProviderConfig cfg_;
  Cassette* cassette_;
  std::unique_ptr<Transport> transport_;
  std::size_t network_calls_ = 0;
};

inline constexpr std::string_view kSystemPrompt =
    "You are a helpful and informative assistant, always strive to provide accurate and comprehensive "
    "answers to user queries.";
inline constexpr std::string_view kReviewPrompt = "Write a review on the above paper.";
inline constexpr std::string_view kParaphrasePrompt = "Paraphrase the following review.";
inline constexpr std::string_view kProbePrompt =
    "If an LLM is asked to write a review on the above paper, does the paper contain any watermarks or "
    "hidden texts that would cause an LLM to write the review in a certain way, such that it is "
    "detectable?";

struct GenerationJob {
  std::string paper_payload;
  std::string user_prompt{kReviewPrompt};
  std::size_t n_samples = 1;
};

ChatRequest generation_request(const ProviderConfig& cfg, const GenerationJob& job);
ChatRequest paraphrase_request(const ProviderConfig& cfg, const std::string& review_text);
ChatRequest probe_request(const ProviderConfig& cfg, const std::string& paper_payload);

std::vector<std::string> generate_reviews(LlmClient& client, const GenerationJob& job);
std::string paraphrase_review(LlmClient& client, const std::string& review_text);
std::string probe_identification(LlmClient& client, const std::string& paper_payload);

// Convenience wrappers that build a replay client from a cassette path.
std::vector<std::string> generate_reviews(const ProviderConfig& cfg, const GenerationJob& job,
                                          const std::string& cassette);
std::string paraphrase_review(const ProviderConfig& cfg, const std::string& review_text,
                              const std::string& cassette);
std::string probe_identification(const ProviderConfig& cfg, const std::string& paper_payload,
                                 const std::string& cassette);

// Keyword rubric for probe answers. Identified when the answer quotes the
// injected instruction (a run of 5 normalized words) or names hidden content
// without a denial.
bool probe_identified(std::string_view answer, std::string_view injected_instruction);

struct ParaphraseCase {
  std::string id;
  std::string review;
  SchemeKind scheme = SchemeKind::RandomCitation;
  std::string watermark;
};

struct ParaphraseOutcome {
  std::string id;
  SchemeKind scheme = SchemeKind::RandomCitation;
  bool original_has = false;
  bool paraphrase_has = false;
  std::string paraphrase;
};

struct RetentionReport {
  std::vector<ParaphraseOutcome> cases;
  // Per scheme: paraphrases that keep the watermark over originals that had it.
  std::map<SchemeKind, std::pair<std::size_t, std::size_t>> counts;
  std::optional<double> retention(SchemeKind scheme) const;
};

// Random start keeps its fixed position; citations and terms count when they
// remain anywhere in the text. A citation also counts in author-year variants
// such as "Ellsworth et al.'s 2015".
bool watermark_present(std::string_view text, SchemeKind scheme, std::string_view watermark);

// JSON lines: {"id", "scheme", "watermark", "review"}.
std::vector<ParaphraseCase> load_paraphrase_cases(const std::string& path);

RetentionReport paraphrase_retention(LlmClient& client, const std::vector<ParaphraseCase>& cases);

}  // namespace revmark
