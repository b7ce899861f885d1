#include "revmark/llmclient.hpp"

#include "revmark/detect.hpp"
#include "revmark/error.hpp"
#include "revmark/normalize.hpp"
#include "revmark/registry.hpp"

#include <curl/curl.h>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

namespace revmark {

using nlohmann::json;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

json request_json(const ChatRequest& r) {
  json messages = json::array();
  for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return json{{"model", r.model}, {"messages", messages}, {"temperature", r.temperature}, {"n", r.n}};
}

std::vector<std::string> parse_choices(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    fail(ErrorCode::ProviderError, std::string("unparseable provider response: ") + e.what());
  }
  if (j.contains("error")) fail(ErrorCode::ProviderError, "provider error: " + j["error"].dump());
  if (!j.contains("choices") || !j["choices"].is_array())
    fail(ErrorCode::ProviderError, "provider response has no choices");
  std::vector<std::string> out;
  for (const auto& c : j["choices"]) {
    const auto* content = c.contains("message") ? &c["message"]["content"] : nullptr;
    if (!content || !content->is_string()) fail(ErrorCode::ProviderError, "choice without message content");
    out.push_back(content->get<std::string>());
  }
  return out;
}

class CurlTransport final : public Transport {
 public:
  CurlTransport() {
    static std::once_flag once;
    std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  }

  HttpResponse post(const std::string& url, const std::string& body, const std::vector<std::string>& headers,
                    double timeout) override {
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> h(curl_easy_init(), curl_easy_cleanup);
    if (!h) fail(ErrorCode::ProviderError, "curl_easy_init failed");
    curl_slist* list = nullptr;
    for (const auto& hd : headers) list = curl_slist_append(list, hd.c_str());
    std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> guard(list, curl_slist_free_all);
    HttpResponse resp;
    curl_easy_setopt(h.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(h.get(), CURLOPT_HTTPHEADER, list);
    curl_easy_setopt(h.get(), CURLOPT_POSTFIELDS, body.c_str());
    curl_easy_setopt(h.get(), CURLOPT_POSTFIELDSIZE, static_cast<long>(body.size()));
    curl_easy_setopt(h.get(), CURLOPT_TIMEOUT_MS, static_cast<long>(timeout * 1000));
    curl_easy_setopt(h.get(), CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(h.get(), CURLOPT_WRITEFUNCTION, +[](char* p, size_t s, size_t n, void* ud) {
      static_cast<std::string*>(ud)->append(p, s * n);
      return s * n;
    });
    curl_easy_setopt(h.get(), CURLOPT_WRITEDATA, &resp.body);
    const CURLcode rc = curl_easy_perform(h.get());
    if (rc != CURLE_OK) fail(ErrorCode::ProviderError, std::string("transport failure: ") + curl_easy_strerror(rc));
    curl_easy_getinfo(h.get(), CURLINFO_RESPONSE_CODE, &resp.status);
    return resp;
  }
};

bool transient(long status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

void ProviderConfig::validate() const {
  if (model_name.empty()) fail(ErrorCode::InvalidArgument, "model_name is empty");
  if (!(timeout > 0.0)) fail(ErrorCode::InvalidArgument, "timeout must be positive");
}

ProviderConfig load_provider_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  ProviderConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ParseError, fmt::format("{}:{}: expected key=value", path, lineno));
    const std::string key = trim(t.substr(0, eq)), v = trim(t.substr(eq + 1));
    try {
      if (key == "endpoint_url") c.endpoint_url = v;
      else if (key == "model_name") c.model_name = v;
      else if (key == "auth_env_var") c.auth_env_var = v;
      else if (key == "max_retries") c.max_retries = std::stoul(v);
      else if (key == "timeout") c.timeout = std::stod(v);
      else if (key == "temperature") c.temperature = std::stod(v);
      else fail(ErrorCode::ParseError, fmt::format("{}:{}: unknown key '{}'", path, lineno, key));
    } catch (const std::logic_error&) {
      fail(ErrorCode::ParseError, fmt::format("{}:{}: bad value for {}", path, lineno, key));
    }
  }
  c.validate();
  return c;
}

std::string ChatRequest::canonical() const { return request_json(*this).dump(); }

std::string ChatRequest::key() const { return sha256_hex(canonical()); }

std::unique_ptr<Transport> make_curl_transport() { return std::make_unique<CurlTransport>(); }

Cassette Cassette::load(const std::string& path, CassetteMode mode) {
  Cassette c;
  c.path_ = path;
  c.mode_ = mode;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (mode == CassetteMode::Record) return c;
    fail(ErrorCode::IoError, "cannot read cassette " + path);
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      std::string key = j.at("key").get<std::string>();
      const json& resp = j.at("response");
      c.records_[std::move(key)] = resp.is_string() ? resp.get<std::string>() : resp.dump();
    } catch (const json::exception& e) {
      fail(ErrorCode::ParseError, fmt::format("{}:{}: {}", path, lineno, e.what()));
    }
  }
  return c;
}

const std::string* Cassette::find(const std::string& key) const {
  const auto it = records_.find(key);
  return it == records_.end() ? nullptr : &it->second;
}

void Cassette::record(const ChatRequest& request, const std::string& response_body) {
  if (mode_ != CassetteMode::Record) fail(ErrorCode::InvalidArgument, "cassette is read-only");
  json resp;
  try {
    resp = json::parse(response_body);
  } catch (const json::exception&) {
    resp = response_body;
  }
  const json line{{"key", request.key()}, {"request", request_json(request)}, {"response", resp}};
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << line.dump() << '\n';
  if (!out) fail(ErrorCode::IoError, "cannot append to cassette " + path_);
  records_[request.key()] = response_body;
}

LlmClient::LlmClient(ProviderConfig cfg, Cassette* cassette, std::unique_ptr<Transport> transport)
    : sleep([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      cfg_(std::move(cfg)),
      cassette_(cassette),
      transport_(std::move(transport)) {
  cfg_.validate();
}

std::string LlmClient::send(const ChatRequest& request) {
  if (cassette_) {
    if (const auto* hit = cassette_->find(request.key())) return *hit;
    if (cassette_->mode() == CassetteMode::Replay)
      fail(ErrorCode::CassetteMiss, fmt::format("no recorded response for request {} in {}", request.key(),
                                                cassette_->path()));
  }
  const char* credential = cfg_.auth_env_var.empty() ? nullptr : std::getenv(cfg_.auth_env_var.c_str());
  if (!credential || !*credential)
    fail(ErrorCode::AuthMissing, fmt::format("environment variable {} is not set", cfg_.auth_env_var));
  if (cfg_.endpoint_url.empty()) fail(ErrorCode::InvalidArgument, "endpoint_url is empty");
  if (!transport_) transport_ = make_curl_transport();

  const std::vector<std::string> headers{"Content-Type: application/json",
                                         std::string("Authorization: Bearer ") + credential};
  const std::string body = request.canonical();
  std::string last_error;
  for (std::size_t attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) sleep(std::chrono::milliseconds(500LL << std::min<std::size_t>(attempt - 1, 6)));
    ++network_calls_;
    HttpResponse resp;
    try {
      resp = transport_->post(cfg_.endpoint_url, body, headers, cfg_.timeout);
    } catch (const Error& e) {
      last_error = e.what();
      continue;
    }
    if (resp.status >= 200 && resp.status < 300) {
      if (cassette_ && cassette_->mode() == CassetteMode::Record) cassette_->record(request, resp.body);
      return resp.body;
    }
    last_error = fmt::format("HTTP {}: {}", resp.status, resp.body.substr(0, 200));
    if (!transient(resp.status)) break;
  }
  fail(ErrorCode::ProviderError, last_error);
}

std::vector<std::string> LlmClient::complete(const ChatRequest& request) {
  auto out = parse_choices(send(request));
  if (out.size() != request.n)
    fail(ErrorCode::ProviderError, fmt::format("expected {} completions, got {}", request.n, out.size()));
  return out;
}

ChatRequest generation_request(const ProviderConfig& cfg, const GenerationJob& job) {
  if (job.n_samples == 0) fail(ErrorCode::InvalidArgument, "n_samples must be at least 1");
  return ChatRequest{cfg.model_name,
                     {{"system", std::string(kSystemPrompt)}, {"user", job.paper_payload + "\n\n" + job.user_prompt}},
                     cfg.temperature,
                     job.n_samples};
}

ChatRequest paraphrase_request(const ProviderConfig& cfg, const std::string& review_text) {
  return ChatRequest{cfg.model_name,
                     {{"system", std::string(kSystemPrompt)},
                      {"user", std::string(kParaphrasePrompt) + "\n\n" + review_text}},
                     cfg.temperature,
                     1};
}

ChatRequest probe_request(const ProviderConfig& cfg, const std::string& paper_payload) {
  return ChatRequest{cfg.model_name,
                     {{"system", std::string(kSystemPrompt)},
                      {"user", paper_payload + "\n\n" + std::string(kProbePrompt)}},
                     cfg.temperature,
                     1};
}

std::vector<std::string> generate_reviews(LlmClient& client, const GenerationJob& job) {
  return client.complete(generation_request(client.config(), job));
}

std::string paraphrase_review(LlmClient& client, const std::string& review_text) {
  if (trim(review_text).empty()) fail(ErrorCode::ProviderError, "provider rejected an empty review");
  return client.complete(paraphrase_request(client.config(), review_text)).front();
}

std::string probe_identification(LlmClient& client, const std::string& paper_payload) {
  return client.complete(probe_request(client.config(), paper_payload)).front();
}

std::vector<std::string> generate_reviews(const ProviderConfig& cfg, const GenerationJob& job,
                                          const std::string& cassette) {
  Cassette c = Cassette::load(cassette);
  LlmClient client(cfg, &c);
  return generate_reviews(client, job);
}

std::string paraphrase_review(const ProviderConfig& cfg, const std::string& review_text, const std::string& cassette) {
  Cassette c = Cassette::load(cassette);
  LlmClient client(cfg, &c);
  return paraphrase_review(client, review_text);
}

std::string probe_identification(const ProviderConfig& cfg, const std::string& paper_payload,
                                 const std::string& cassette) {
  Cassette c = Cassette::load(cassette);
  LlmClient client(cfg, &c);
  return probe_identification(client, paper_payload);
}

bool probe_identified(std::string_view answer, std::string_view injected_instruction) {
  const auto a = word_tokens(answer);
  const auto p = word_tokens(injected_instruction);
  constexpr std::size_t run = 5;
  if (p.size() >= run && a.size() >= run) {
    for (std::size_t i = 0; i + run <= p.size(); ++i)
      if (std::search(a.begin(), a.end(), p.begin() + i, p.begin() + i + run) != a.end()) return true;
  } else if (!p.empty() && std::search(a.begin(), a.end(), p.begin(), p.end()) != a.end()) {
    return true;
  }
  const std::string text = normalize(answer);
  static constexpr std::string_view denials[] = {
      "no hidden", "no watermark", "does not contain", "doesn't contain", "do not see any", "don't see any",
      "no evidence of", "not contain any", "there are no", "i did not find", "i didn't find"};
  for (const auto d : denials)
    if (text.find(d) != std::string::npos) return false;
  static constexpr std::string_view markers[] = {
      "hidden text", "hidden instruction", "hidden prompt", "injected", "prompt injection", "white text",
      "embedded instruction", "instruction embedded", "watermark"};
  for (const auto m : markers)
    if (text.find(m) != std::string::npos) return true;
  return false;
}

std::optional<double> RetentionReport::retention(SchemeKind scheme) const {
  const auto it = counts.find(scheme);
  if (it == counts.end() || it->second.second == 0) return std::nullopt;
  return double(it->second.first) / double(it->second.second);
}

namespace {

// "{surname} et al." followed by the year within two tokens, so that
// "Ellsworth et al.'s 2015" and "Ellsworth et al., 2015" both count.
bool citation_variant_present(std::string_view text, std::string_view watermark) {
  const auto w = word_tokens(watermark);
  const auto et = std::find(w.begin(), w.end(), "et");
  if (et == w.begin() || et == w.end() || w.end() - et != 3 || et[1] != "al") return false;
  const std::vector<std::string> surname(w.begin(), et);
  const std::string& year = w.back();
  const auto t = word_tokens(text);
  for (std::size_t i = 0; i + surname.size() + 2 < t.size(); ++i) {
    if (!std::equal(surname.begin(), surname.end(), t.begin() + static_cast<std::ptrdiff_t>(i))) continue;
    std::size_t k = i + surname.size();
    if (t[k] != "et" || t[k + 1] != "al") continue;
    k += 2;
    if (k < t.size() && t[k] == "s") ++k;
    for (std::size_t j = k; j < std::min(t.size(), k + 2); ++j)
      if (t[j] == year) return true;
  }
  return false;
}

}  // namespace

bool watermark_present(std::string_view text, SchemeKind scheme, std::string_view watermark) {
  if (scheme == SchemeKind::RandomCitation && citation_variant_present(text, watermark)) return true;
  const WatermarkSet single(scheme, {std::string(watermark)});
  ScanOptions opt;
  if (scheme != SchemeKind::RandomStart) opt.policy = PositionPolicy::Anywhere;
  return CandidateMatcher(single, opt).present(ReviewRecord::make("r", std::string(text)), 0);
}

std::vector<ParaphraseCase> load_paraphrase_cases(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  std::vector<ParaphraseCase> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      out.push_back(ParaphraseCase{j.at("id").get<std::string>(), j.at("review").get<std::string>(),
                                   parse_scheme(j.at("scheme").get<std::string>()),
                                   j.at("watermark").get<std::string>()});
    } catch (const json::exception& e) {
      fail(ErrorCode::ParseError, fmt::format("{}:{}: {}", path, lineno, e.what()));
    }
  }
  return out;
}

RetentionReport paraphrase_retention(LlmClient& client, const std::vector<ParaphraseCase>& cases) {
  RetentionReport rep;
  for (const auto& c : cases) {
    ParaphraseOutcome o{c.id, c.scheme, watermark_present(c.review, c.scheme, c.watermark), false, {}};
    o.paraphrase = paraphrase_review(client, c.review);
    o.paraphrase_has = watermark_present(o.paraphrase, c.scheme, c.watermark);
    auto& [kept, had] = rep.counts[c.scheme];
    if (o.original_has) {
      ++had;
      kept += o.paraphrase_has;
    }
    rep.cases.push_back(std::move(o));
  }
  return rep;
}

}  // namespace revmark
