#include "revmark/revmark.h"

#include "revmark/detect.hpp"
#include "revmark/error.hpp"
#include "revmark/inject.hpp"
#include "revmark/llmclient.hpp"
#include "revmark/normalize.hpp"
#include "revmark/registry.hpp"
#include "revmark/rng.hpp"
#include "revmark/simulate.hpp"
#include "revmark/watermark.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

struct rm_set {
  revmark::WatermarkSet set;
  std::unordered_map<std::string, std::size_t> index;
};

struct rm_registry {
  revmark::Registry reg;
};

struct rm_corpus {
  std::vector<revmark::CorpusEntry> entries;
};

namespace {

using namespace revmark;
using nlohmann::ordered_json;

thread_local std::string g_last_error;

template <typename F>
rm_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return RM_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<rm_status>(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return RM_PARSE_ERROR;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RM_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RM_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) { *out = dup_string(s); }

rm_set* wrap(WatermarkSet set) {
  auto* h = new rm_set{std::move(set), {}};
  h->index.reserve(h->set.size());
  for (std::size_t i = 0; i < h->set.size(); ++i) h->index.emplace(normalize(h->set[i]), i);
  return h;
}

std::optional<std::string> opt(const char* s) {
  return s ? std::optional<std::string>(s) : std::nullopt;
}

ordered_json assignment_json(const Assignment& a) {
  ordered_json j{{"paper_id", a.paper_id}};
  j["review_slot"] = a.review_slot ? ordered_json(*a.review_slot) : ordered_json(nullptr);
  j["set_id"] = a.set_id;
  j["index"] = a.index;
  j["scheme"] = std::string(scheme_name(a.scheme));
  j["seed"] = a.seed;
  j["created_at"] = a.created_at;
  j["injection_method"] = a.injection_method;
  return j;
}

ordered_json verification_json(const VerificationReport& r) {
  ordered_json j{{"payload_extractable", r.payload_extractable}};
  j["page"] = r.page ? ordered_json(*r.page + 1) : ordered_json(nullptr);
  j["occurrences"] = r.occurrences;
  j["visual_stealth"] = r.visual_stealth ? ordered_json(std::string(stealth_name(*r.visual_stealth)))
                                         : ordered_json(nullptr);
  j["preexisting_unchanged"] = r.preexisting_unchanged;
  ordered_json audit = ordered_json::array();
  for (const auto& g : r.audit)
    audit.push_back({{"font", g.font}, {"code", g.code}, {"payload", g.payload}, {"displayed", g.displayed}});
  j["audit"] = audit;
  j["audit_diff"] = r.audit_diff;
  j["notes"] = r.notes;
  return j;
}

std::uint64_t key_seed(std::uint64_t seed, const std::string& paper_id, const char* slot) {
  const std::string digest = sha256_hex(paper_id + '\x1f' + (slot ? slot : ""));
  return derive_seed(seed, std::stoull(digest.substr(0, 16), nullptr, 16));
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

struct Acquisition {
  ProviderConfig cfg;
  std::optional<Cassette> cassette;
  std::unique_ptr<LlmClient> client;

  Acquisition(const char* conf, const char* cassette_path, int record) : cfg(load_provider_config(conf)) {
    if (cassette_path) cassette = Cassette::load(cassette_path, record ? CassetteMode::Record : CassetteMode::Replay);
    client = std::make_unique<LlmClient>(cfg, cassette ? &*cassette : nullptr);
  }

  ordered_json meta() const {
    ordered_json j{{"model", cfg.model_name}, {"temperature", cfg.temperature}};
    j["cassette"] = cassette ? ordered_json(cassette->path()) : ordered_json(nullptr);
    j["network_calls"] = client->network_calls();
    return j;
  }
};

}  // namespace

extern "C" {

const char* rm_version(void) { return "1.0.0"; }

const char* rm_last_error(void) { return g_last_error.c_str(); }

const char* rm_status_name(rm_status status) {
  if (status == RM_INTERNAL) return "Internal";
  return error_code_name(static_cast<ErrorCode>(status)).data();
}

void rm_string_free(char* s) { std::free(s); }

rm_status rm_set_build_random_start(rm_set** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = wrap(build_random_start_set());
  });
}

rm_status rm_set_build_citation(const char* surnames_path, int year_lo, int year_hi, rm_set** out) {
  return guarded([&] {
    require(surnames_path && out, "null argument");
    const auto names = load_surnames(surnames_path);
    *out = wrap(build_citation_set(names, year_lo, year_hi));
  });
}

rm_status rm_set_build_technical_term(const char* keywords_path, size_t n, rm_set** out) {
  return guarded([&] {
    require(keywords_path && out, "null argument");
    *out = wrap(build_technical_term_set(load_keyword_table(keywords_path), n));
  });
}

rm_status rm_set_load(const char* path, rm_set** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = wrap(load_watermark_set(path));
  });
}

rm_status rm_set_save(const rm_set* set, const char* path) {
  return guarded([&] {
    require(set && path, "null argument");
    save_watermark_set(path, set->set);
  });
}

void rm_set_free(rm_set* set) { delete set; }

size_t rm_set_size(const rm_set* set) { return set ? set->set.size() : 0; }

rm_scheme rm_set_scheme(const rm_set* set) {
  if (!set) return RM_RANDOM_START;
  switch (set->set.scheme()) {
    case SchemeKind::RandomStart: return RM_RANDOM_START;
    case SchemeKind::TechnicalTerm: return RM_TECHNICAL_TERM;
    case SchemeKind::RandomCitation: return RM_RANDOM_CITATION;
  }
  return RM_RANDOM_START;
}

const char* rm_set_id(const rm_set* set) { return set ? set->set.id().c_str() : ""; }

rm_status rm_set_candidate(const rm_set* set, size_t index, const char** out) {
  return guarded([&] {
    require(set && out, "null argument");
    if (index >= set->set.size()) fail(ErrorCode::InvalidArgument, fmt::format("index {} out of range", index));
    *out = set->set[index].c_str();
  });
}

rm_status rm_set_index_of(const rm_set* set, const char* surface, size_t* index) {
  return guarded([&] {
    require(set && surface && index, "null argument");
    const auto it = set->index.find(normalize(surface));
    if (it == set->index.end()) fail(ErrorCode::NotFound, fmt::format("'{}' is not a candidate", surface));
    *index = it->second;
  });
}

rm_status rm_injection_prompt(const rm_set* set, size_t index, char** out) {
  return guarded([&] {
    require(set && out, "null argument");
    put(out, render_injection_prompt(watermark_at(set->set, index), set->set.scheme()));
  });
}

rm_status rm_registry_open(const char* path, rm_registry** out) {
  return guarded([&] {
    require(out, "out is null");
    auto h = std::make_unique<rm_registry>();
    if (path && std::ifstream(path).good()) h->reg = Registry::load(path);
    *out = h.release();
  });
}

rm_status rm_registry_save(const rm_registry* reg, const char* path) {
  return guarded([&] {
    require(reg && path, "null argument");
    reg->reg.save(path);
  });
}

void rm_registry_free(rm_registry* reg) { delete reg; }

size_t rm_registry_assignment_count(const rm_registry* reg) { return reg ? reg->reg.assignment_count() : 0; }

rm_status rm_registry_assign(rm_registry* reg, const rm_set* set, const char* paper_id, const char* review_slot,
                             uint64_t seed, const char* created_at, const char* method, int supersede,
                             size_t* index) {
  return guarded([&] {
    require(reg && set && paper_id && *paper_id, "null argument");
    reg->reg.register_set(set->set);
    Assignment a;
    a.paper_id = paper_id;
    a.review_slot = opt(review_slot);
    a.set_id = set->set.id();
    a.scheme = set->set.scheme();
    a.seed = key_seed(seed, a.paper_id, review_slot);
    a.index = sample_watermark(set->set, a.seed).index;
    a.created_at = created_at ? created_at : "";
    a.injection_method = method ? method : "";
    reg->reg.record_assignment(a, supersede != 0);
    if (index) *index = a.index;
  });
}

rm_status rm_registry_lookup(const rm_registry* reg, const char* paper_id, const char* review_slot, char** json) {
  return guarded([&] {
    require(reg && paper_id && json, "null argument");
    put(json, assignment_json(reg->reg.resolve(paper_id, opt(review_slot))).dump());
  });
}

rm_status rm_registry_verify(const rm_registry* reg, int* chain_ok) {
  return guarded([&] {
    require(reg && chain_ok, "null argument");
    *chain_ok = reg->reg.verify_chain() ? 1 : 0;
  });
}

rm_status rm_registry_table(const rm_registry* reg, const rm_set* set, char** text) {
  return guarded([&] {
    require(reg && text, "null argument");
    std::ostringstream ss;
    reg->reg.write_table(ss, set ? &set->set : nullptr);
    put(text, ss.str());
  });
}

rm_status rm_corpus_load(const char* path, rm_corpus** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new rm_corpus{load_corpus(path)};
  });
}

void rm_corpus_free(rm_corpus* corpus) { delete corpus; }

size_t rm_corpus_size(const rm_corpus* corpus) { return corpus ? corpus->entries.size() : 0; }

void rm_detect_config_init(rm_detect_config* cfg) {
  if (!cfg) return;
  *cfg = rm_detect_config{0.05, 1, -1, -1, RM_GREEDY, 0};
}

size_t rm_fpr_threshold(double alpha, size_t set_size) {
  try {
    return fpr_threshold(alpha, set_size);
  } catch (...) {
    return 0;
  }
}

rm_status rm_scan(const rm_set* set, const rm_corpus* corpus, char** json) {
  return guarded([&] {
    require(set && corpus && json, "null argument");
    std::vector<ReviewRecord> reviews;
    for (const auto& e : corpus->entries) reviews.push_back(e.review);
    const OccurrenceMatrix x = build_occurrence_matrix(reviews, set->set);
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      ordered_json cands = ordered_json::array();
      for (const auto j : x.row(i)) cands.push_back({{"index", j}, {"surface", set->set[j]}});
      rows.push_back({{"review_id", x.row_ids()[i]}, {"count", x.row_sum(i)}, {"candidates", cands}});
    }
    ordered_json j{{"set_id", set->set.id()},
                   {"scheme", std::string(scheme_name(set->set.scheme()))},
                   {"reviews", x.rows()},
                   {"total", x.total()},
                   {"rows", rows}};
    put(json, j.dump());
  });
}

rm_status rm_detect_single(const rm_set* set, const char* review_text, size_t w_star, size_t tau, int* flagged,
                           int* present, size_t* candidate_count) {
  return guarded([&] {
    require(set && review_text, "null argument");
    const auto d = detect_single(ReviewRecord::make("review", review_text), set->set, watermark_at(set->set, w_star), tau);
    if (flagged) *flagged = d.flagged;
    if (present) *present = d.present;
    if (candidate_count) *candidate_count = d.candidate_count;
  });
}

rm_status rm_detect_batch(const rm_set* set, const rm_corpus* corpus, const rm_registry* reg,
                          const rm_detect_config* cfg, char** json) {
  return guarded([&] {
    require(set && corpus && reg && cfg && json, "null argument");
    DetectionConfig dc;
    dc.alpha = cfg->alpha;
    dc.tau = cfg->tau;
    if (cfg->rho >= 0) dc.rho = static_cast<std::size_t>(cfg->rho);
    if (cfg->omega >= 0) dc.omega = static_cast<std::size_t>(cfg->omega);
    dc.solver = cfg->solver == RM_EXACT ? Solver::Exact : Solver::Greedy;
    dc.seed = cfg->seed;

    std::vector<ReviewRecord> reviews;
    std::vector<std::optional<std::size_t>> w_star;
    std::vector<std::size_t> plain;
    for (const auto& e : corpus->entries) {
      reviews.push_back(e.review);
      const Assignment* found = nullptr;
      try {
        found = &reg->reg.resolve(e.paper_id.empty() ? e.review.review_id : e.paper_id, e.review_slot);
      } catch (const Error& err) {
        if (err.code() != ErrorCode::NotFound) throw;
        fail(ErrorCode::MissingAssignment, fmt::format("review '{}' has no assignment", e.review.review_id));
      }
      const Assignment& a = *found;
      if (a.set_id != set->set.id())
        fail(ErrorCode::SchemeMismatch,
             fmt::format("review '{}' is assigned from set {}, not {}", e.review.review_id, a.set_id, set->set.id()));
      w_star.push_back(a.index);
      plain.push_back(a.index);
    }
    const OccurrenceMatrix x = build_occurrence_matrix(reviews, set->set);
    dc.validate(x.rows(), x.cols());
    const DetectionOutcome out = detect_multiple(x, w_star, dc);

    ordered_json flags = ordered_json::array();
    for (const auto i : out.flagged_rows)
      flags.push_back({{"review_id", x.row_ids()[i]},
                       {"paper_id", corpus->entries[i].paper_id},
                       {"watermark", set->set[plain[i]]},
                       {"candidate_count", x.row_sum(i)}});
    ordered_json discarded_reviews = ordered_json::array();
    for (const auto i : out.discard.reviews) discarded_reviews.push_back(x.row_ids()[i]);
    ordered_json discarded_watermarks = ordered_json::array();
    for (const auto j : out.discard.watermarks) discarded_watermarks.push_back({{"index", j}, {"surface", set->set[j]}});
    auto ids = [&](const std::vector<std::size_t>& rows) {
      ordered_json a = ordered_json::array();
      for (const auto i : rows) a.push_back(x.row_ids()[i]);
      return a;
    };
    ordered_json j{{"set_id", set->set.id()},
                   {"scheme", std::string(scheme_name(set->set.scheme()))},
                   {"reviews", x.rows()},
                   {"set_size", x.cols()},
                   {"alpha", dc.alpha},
                   {"solver", dc.solver == Solver::Exact ? "exact" : "greedy"},
                   {"budget", out.discard.budget},
                   {"residual", out.discard.residual},
                   {"objective", out.discard.objective},
                   {"discarded_reviews", discarded_reviews},
                   {"discarded_watermarks", discarded_watermarks},
                   {"flagged", flags},
                   {"bonferroni", ids(bonferroni_detect(x, set->set.policy(), plain, dc.alpha))},
                   {"holm", ids(holm_detect(x, plain, dc.alpha))}};
    put(json, j.dump());
  });
}

rm_status rm_inject_file(const char* in_pdf, const char* spec_path, const char* out_pdf, char** json) {
  return guarded([&] {
    require(in_pdf && spec_path && out_pdf, "null argument");
    const pdf::Document doc = pdf::load_document(in_pdf);
    const InjectionSpecFile spec = load_injection_spec(spec_path);
    const InjectionResult res = inject(doc, spec.spec, spec.remap ? &*spec.remap : nullptr);
    pdf::write_file(out_pdf, res.bytes);
    if (json) {
      const pdf::Document written = pdf::Document::parse(res.bytes);
      ordered_json j{{"method", std::string(method_name(spec.spec.method))},
                     {"page", res.page + 1},
                     {"fonts", res.fonts},
                     {"expected_stealth", std::string(stealth_name(expected_stealth(spec.spec.method)))},
                     {"verification", verification_json(verify_injection(written, spec.spec))}};
      put(json, j.dump());
    }
  });
}

rm_status rm_verify_file(const char* pdf_path, const char* spec_path, char** json) {
  return guarded([&] {
    require(pdf_path && spec_path && json, "null argument");
    const pdf::Document doc = pdf::load_document(pdf_path);
    const InjectionSpecFile spec = load_injection_spec(spec_path);
    put(json, verification_json(verify_injection(doc, spec.spec)).dump());
  });
}

rm_status rm_extract_text(const char* pdf_path, char** json) {
  return guarded([&] {
    require(pdf_path && json, "null argument");
    const pdf::Document doc = pdf::load_document(pdf_path);
    put(json, ordered_json{{"pages", extract_text(doc)}, {"displayed", displayed_text(doc)}}.dump());
  });
}

void rm_sim_overrides_init(rm_sim_overrides* o) {
  if (!o) return;
  *o = rm_sim_overrides{0, 0, -1.0, -1, -1, -1, -1, -1};
}

rm_status rm_simulate(const char* config_path, const rm_set* set, const rm_sim_overrides* overrides, char** json) {
  return guarded([&] {
    require(config_path && set && json, "null argument");
    SimulationConfig cfg = load_simulation_config(config_path);
    if (const auto* o = overrides) {
      if (o->has_seed) cfg.seed = o->seed;
      if (o->alpha >= 0) cfg.alpha = o->alpha;
      if (o->tau >= 0) cfg.tau = static_cast<std::size_t>(o->tau);
      if (o->rho >= 0) cfg.rho = static_cast<std::size_t>(o->rho);
      if (o->omega >= 0) cfg.omega = static_cast<std::size_t>(o->omega);
      if (o->trials >= 0) cfg.trials = static_cast<std::size_t>(o->trials);
      if (o->solver >= 0) cfg.solver = o->solver == RM_EXACT ? Solver::Exact : Solver::Greedy;
    }
    put(json, run_simulation(cfg, set->set));
  });
}

rm_status rm_bootstrap_ci(size_t successes, size_t n, size_t replicates, double level, uint64_t seed, double* low,
                          double* high) {
  return guarded([&] {
    const Interval ci = bootstrap_ci(successes, n, replicates, level, seed);
    if (low) *low = ci.low;
    if (high) *high = ci.high;
  });
}

rm_status rm_hpsr_osr_file(const char* csv_path, size_t replicates, uint64_t seed, char** json) {
  return guarded([&] {
    require(csv_path && json, "null argument");
    std::ifstream in(csv_path);
    if (!in) fail(ErrorCode::IoError, fmt::format("cannot read {}", csv_path));
    std::vector<std::pair<std::size_t, std::size_t>> items;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || (lineno == 1 && line.rfind("item,", 0) == 0)) continue;
      const auto c2 = line.rfind(',');
      const auto c1 = c2 == std::string::npos ? std::string::npos : line.rfind(',', c2 - 1);
      if (c1 == std::string::npos) fail(ErrorCode::ParseError, fmt::format("{}:{}: expected item,watermarked,total", csv_path, lineno));
      try {
        items.emplace_back(std::stoul(line.substr(c1 + 1, c2 - c1 - 1)), std::stoul(line.substr(c2 + 1)));
      } catch (const std::logic_error&) {
        fail(ErrorCode::ParseError, fmt::format("{}:{}: bad count", csv_path, lineno));
      }
    }
    const SuccessMetrics m = compute_hpsr_osr(items, 8, 10, replicates, seed);
    ordered_json j{{"items", items.size()},
                   {"hpsr", fmt::format("{}/{}", m.hpsr_numerator, m.hpsr_denominator)},
                   {"hpsr_numerator", m.hpsr_numerator},
                   {"hpsr_denominator", m.hpsr_denominator},
                   {"osr", m.osr},
                   {"ci_low", m.ci_low},
                   {"ci_high", m.ci_high},
                   {"replicates", replicates}};
    put(json, j.dump());
  });
}

rm_status rm_acquire_generate(const char* provider_conf, const char* paper_path, size_t n_samples,
                              const char* cassette, int record, char** json) {
  return guarded([&] {
    require(provider_conf && paper_path && json, "null argument");
    Acquisition acq(provider_conf, cassette, record);
    GenerationJob job{read_text(paper_path), std::string(kReviewPrompt), n_samples};
    const auto reviews = generate_reviews(*acq.client, job);
    ordered_json j = acq.meta();
    j["reviews"] = reviews;
    j["network_calls"] = acq.client->network_calls();
    put(json, j.dump());
  });
}

rm_status rm_acquire_paraphrase(const char* provider_conf, const char* cases_path, const char* cassette, int record,
                                char** json) {
  return guarded([&] {
    require(provider_conf && cases_path && json, "null argument");
    Acquisition acq(provider_conf, cassette, record);
    const RetentionReport rep = paraphrase_retention(*acq.client, load_paraphrase_cases(cases_path));
    ordered_json cases = ordered_json::array();
    for (const auto& c : rep.cases)
      cases.push_back({{"id", c.id},
                       {"scheme", std::string(scheme_name(c.scheme))},
                       {"original_has", c.original_has},
                       {"paraphrase_has", c.paraphrase_has},
                       {"paraphrase", c.paraphrase}});
    ordered_json retention = ordered_json::object();
    for (const auto& [scheme, counts] : rep.counts) {
      ordered_json r{{"kept", counts.first}, {"had", counts.second}};
      const auto v = rep.retention(scheme);
      r["retention"] = v ? ordered_json(*v) : ordered_json(nullptr);
      retention[std::string(scheme_name(scheme))] = r;
    }
    ordered_json j = acq.meta();
    j["cases"] = cases;
    j["retention"] = retention;
    j["network_calls"] = acq.client->network_calls();
    put(json, j.dump());
  });
}

rm_status rm_acquire_probe(const char* provider_conf, const char* cases_path, const char* cassette, int record,
                           char** json) {
  return guarded([&] {
    require(provider_conf && cases_path && json, "null argument");
    Acquisition acq(provider_conf, cassette, record);
    std::ifstream in(cases_path);
    if (!in) fail(ErrorCode::IoError, fmt::format("cannot read {}", cases_path));
    ordered_json cases = ordered_json::array();
    std::size_t identified = 0;
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto c = nlohmann::json::parse(line);
      const std::string answer = probe_identification(*acq.client, c.at("paper").get<std::string>());
      const bool hit = probe_identified(answer, c.value("instruction", std::string()));
      identified += hit;
      cases.push_back({{"id", c.value("id", std::string())}, {"identified", hit}, {"answer", answer}});
    }
    ordered_json j = acq.meta();
    j["cases"] = cases;
    j["identified"] = identified;
    j["network_calls"] = acq.client->network_calls();
    put(json, j.dump());
  });
}

}  // extern "C"
