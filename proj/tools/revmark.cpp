#include "revmark/revmark.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitInput = 3;

class Failure : public std::runtime_error {
 public:
  Failure(int code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

void check(rm_status s) {
  if (s == RM_OK) return;
  const int code = (s == RM_INFEASIBLE || s == RM_INFEASIBLE_PROFILE) ? kExitInfeasible : kExitInput;
  throw Failure(code, std::string(rm_status_name(s)) + ": " + rm_last_error());
}

struct CString {
  char* p = nullptr;
  ~CString() { rm_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

using SetPtr = std::unique_ptr<rm_set, decltype(&rm_set_free)>;
using RegistryPtr = std::unique_ptr<rm_registry, decltype(&rm_registry_free)>;
using CorpusPtr = std::unique_ptr<rm_corpus, decltype(&rm_corpus_free)>;

SetPtr load_set(const std::string& path) {
  rm_set* s = nullptr;
  check(rm_set_load(path.c_str(), &s));
  return SetPtr(s, rm_set_free);
}

RegistryPtr open_registry(const std::string& path) {
  rm_registry* r = nullptr;
  check(rm_registry_open(path.c_str(), &r));
  return RegistryPtr(r, rm_registry_free);
}

CorpusPtr load_corpus(const std::string& path) {
  rm_corpus* c = nullptr;
  check(rm_corpus_load(path.c_str(), &c));
  return CorpusPtr(c, rm_corpus_free);
}

struct Globals {
  std::uint64_t seed = 0;
  bool freeze = false;
  std::string out;
  std::vector<std::string> argv;

  std::string timestamp() const {
    if (freeze) return "1970-01-01T00:00:00Z";
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  ordered_json provenance(const std::string& command, ordered_json result) const {
    return ordered_json{{"tool", "revmark"},
                        {"version", rm_version()},
                        {"command", command},
                        {"invocation", argv},
                        {"seed", seed},
                        {"created_at", timestamp()},
                        {"result", std::move(result)}};
  }

  void write_artifact(const std::string& path, const std::string& command, ordered_json result) const {
    std::ofstream f(path, std::ios::binary);
    f << provenance(command, std::move(result)).dump(2) << '\n';
    if (!f) throw Failure(kExitInput, "cannot write " + path);
  }
};

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void row(const std::string& key, const std::string& value) {
  std::cout << key;
  for (std::size_t i = key.size(); i < 26; ++i) std::cout << ' ';
  if (key.size() >= 26) std::cout << "  ";
  std::cout << value << '\n';
}

std::string scalar(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fmt_double(v.get<double>());
  if (v.is_null()) return "-";
  return v.dump();
}

void print_flat(const ordered_json& j, const std::string& prefix = "") {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      print_flat(*it, key);
    } else if (it->is_array()) {
      bool simple = true;
      for (const auto& e : *it) simple = simple && !e.is_structured();
      if (simple && it->size() <= 8) {
        std::string s;
        for (const auto& e : *it) s += (s.empty() ? "" : ", ") + scalar(e);
        row(key, s.empty() ? "-" : s);
      } else {
        row(key, std::to_string(it->size()) + " entries");
      }
    } else {
      row(key, scalar(*it));
    }
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure(kExitInput, "cannot read " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure(kExitInput, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

rm_solver parse_solver(const std::string& s) { return s == "exact" ? RM_EXACT : RM_GREEDY; }

// ---------------------------------------------------------------- build-set

struct BuildSetArgs {
  std::string scheme;
  std::string surnames;
  int year_lo = 2014;
  int year_hi = 2024;
  std::string keywords;
  std::size_t n = 1000;
};

int run_build_set(const Globals& g, const BuildSetArgs& a) {
  rm_set* raw = nullptr;
  if (a.scheme == "random-start") {
    check(rm_set_build_random_start(&raw));
  } else if (a.scheme == "random-citation") {
    if (a.surnames.empty()) throw Failure(kExitInput, "--surnames is required for random-citation");
    check(rm_set_build_citation(a.surnames.c_str(), a.year_lo, a.year_hi, &raw));
  } else {
    if (a.keywords.empty()) throw Failure(kExitInput, "--keywords is required for technical-term");
    check(rm_set_build_technical_term(a.keywords.c_str(), a.n, &raw));
  }
  SetPtr set(raw, rm_set_free);
  check(rm_set_save(set.get(), g.out.c_str()));
  ordered_json result{{"set_id", rm_set_id(set.get())}, {"size", rm_set_size(set.get())}, {"path", g.out}};
  g.write_artifact(g.out + ".provenance.json", "build-set", result);
  row("set_id", rm_set_id(set.get()));
  row("size", std::to_string(rm_set_size(set.get())));
  row("written", g.out);
  return kExitOk;
}

// ---------------------------------------------------------------- assign

struct AssignArgs {
  std::string set, registry;
  std::vector<std::string> papers;
  std::string papers_file;
  std::string slot;
  std::string method;
  bool supersede = false;
};

int run_assign(const Globals& g, const AssignArgs& a) {
  auto set = load_set(a.set);
  auto reg = open_registry(a.registry);
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& p : a.papers) keys.emplace_back(p, a.slot);
  if (!a.papers_file.empty())
    for (const auto& line : read_lines(a.papers_file)) {
      const auto tab = line.find('\t');
      keys.emplace_back(line.substr(0, tab), tab == std::string::npos ? a.slot : line.substr(tab + 1));
    }
  if (keys.empty()) throw Failure(kExitInput, "no papers given (--paper or --papers)");
  const std::string ts = g.timestamp();
  ordered_json out = ordered_json::array();
  for (const auto& [paper, slot] : keys) {
    std::size_t index = 0;
    check(rm_registry_assign(reg.get(), set.get(), paper.c_str(), slot.empty() ? nullptr : slot.c_str(), g.seed,
                             ts.c_str(), a.method.empty() ? nullptr : a.method.c_str(), a.supersede, &index));
    const char* surface = nullptr;
    check(rm_set_candidate(set.get(), index, &surface));
    CString prompt;
    check(rm_injection_prompt(set.get(), index, &prompt.p));
    std::cout << paper << '\t' << (slot.empty() ? "-" : slot) << '\t' << index << '\t' << surface << '\t'
              << prompt.str() << '\n';
    out.push_back({{"paper_id", paper},
                   {"review_slot", slot.empty() ? ordered_json(nullptr) : ordered_json(slot)},
                   {"index", index},
                   {"watermark", surface},
                   {"prompt", prompt.str()}});
  }
  check(rm_registry_save(reg.get(), a.registry.c_str()));
  if (!g.out.empty()) g.write_artifact(g.out, "assign", ordered_json{{"set_id", rm_set_id(set.get())}, {"assignments", out}});
  return kExitOk;
}

// ---------------------------------------------------------------- inject

struct InjectArgs {
  std::string pdf, spec, report;
};

int run_inject(const Globals& g, const InjectArgs& a) {
  if (g.out.empty()) throw Failure(kExitInput, "--out is required for inject");
  CString json;
  check(rm_inject_file(a.pdf.c_str(), a.spec.c_str(), g.out.c_str(), &json.p));
  const auto result = ordered_json::parse(json.str());
  print_flat(result);
  if (!a.report.empty()) g.write_artifact(a.report, "inject", result);
  const auto& v = result["verification"];
  const bool ok = v["payload_extractable"].get<bool>() && v["preexisting_unchanged"].get<bool>() &&
                  v["visual_stealth"] == result["expected_stealth"];
  if (!ok) throw Failure(kExitInput, "verification of the written file failed");
  return kExitOk;
}

// ---------------------------------------------------------------- scan

struct ScanArgs {
  std::string set, corpus;
};

int run_scan(const Globals& g, const ScanArgs& a) {
  auto set = load_set(a.set);
  auto corpus = load_corpus(a.corpus);
  CString json;
  check(rm_scan(set.get(), corpus.get(), &json.p));
  const auto result = ordered_json::parse(json.str());
  for (const auto& r : result["rows"]) {
    std::string cands;
    for (const auto& c : r["candidates"]) cands += (cands.empty() ? "" : "; ") + c["surface"].get<std::string>();
    std::cout << r["review_id"].get<std::string>() << '\t' << r["count"].get<std::size_t>() << '\t'
              << (cands.empty() ? "-" : cands) << '\n';
  }
  if (!g.out.empty()) g.write_artifact(g.out, "scan", result);
  return kExitOk;
}

// ---------------------------------------------------------------- detect-single

struct SingleArgs {
  std::string set, review_file, text, watermark, registry, paper, slot;
  std::optional<std::size_t> index, tau;
  double alpha = 0.05;
};

int run_detect_single(const Globals& g, const SingleArgs& a) {
  auto set = load_set(a.set);
  const std::string text = a.review_file.empty() ? a.text : read_all(a.review_file);
  std::size_t w = 0;
  if (a.index) {
    w = *a.index;
  } else if (!a.watermark.empty()) {
    check(rm_set_index_of(set.get(), a.watermark.c_str(), &w));
  } else if (!a.registry.empty() && !a.paper.empty()) {
    auto reg = open_registry(a.registry);
    CString json;
    check(rm_registry_lookup(reg.get(), a.paper.c_str(), a.slot.empty() ? nullptr : a.slot.c_str(), &json.p));
    const auto assignment = ordered_json::parse(json.str());
    if (assignment["set_id"].get<std::string>() != rm_set_id(set.get()))
      throw Failure(kExitInput, "the assignment refers to a different watermark set");
    w = assignment["index"].get<std::size_t>();
  } else {
    throw Failure(kExitInput, "give --watermark, --index, or --registry with --paper");
  }
  const std::size_t tau = a.tau.value_or(rm_fpr_threshold(a.alpha, rm_set_size(set.get())));
  int flagged = 0, present = 0;
  std::size_t count = 0;
  check(rm_detect_single(set.get(), text.c_str(), w, tau, &flagged, &present, &count));
  const char* surface = nullptr;
  check(rm_set_candidate(set.get(), w, &surface));
  row("watermark", surface);
  row("tau", std::to_string(tau));
  row("present", present ? "yes" : "no");
  row("candidate_count", std::to_string(count));
  row("decision", flagged ? "flag" : "do not flag");
  if (!g.out.empty())
    g.write_artifact(g.out, "detect-single",
                     ordered_json{{"set_id", rm_set_id(set.get())},
                                  {"index", w},
                                  {"watermark", surface},
                                  {"tau", tau},
                                  {"present", present != 0},
                                  {"candidate_count", count},
                                  {"flagged", flagged != 0}});
  return kExitOk;
}

// ---------------------------------------------------------------- detect-batch

struct BatchArgs {
  std::string set, corpus, registry, solver = "greedy";
  double alpha = 0.05;
  std::optional<std::size_t> tau, rho, omega;
};

int run_detect_batch(const Globals& g, const BatchArgs& a) {
  auto set = load_set(a.set);
  auto corpus = load_corpus(a.corpus);
  auto reg = open_registry(a.registry);
  rm_detect_config cfg;
  rm_detect_config_init(&cfg);
  cfg.alpha = a.alpha;
  cfg.tau = a.tau.value_or(rm_fpr_threshold(a.alpha, rm_set_size(set.get())));
  if (a.rho) cfg.rho = static_cast<std::int64_t>(*a.rho);
  if (a.omega) cfg.omega = static_cast<std::int64_t>(*a.omega);
  cfg.solver = parse_solver(a.solver);
  cfg.seed = g.seed;
  CString json;
  check(rm_detect_batch(set.get(), corpus.get(), reg.get(), &cfg, &json.p));
  auto result = ordered_json::parse(json.str());

  // Optional ground truth: corpus lines may carry "planted": true|false.
  std::map<std::string, bool> planted;
  for (const auto& line : read_lines(a.corpus)) {
    const auto j = ordered_json::parse(line);
    if (j.contains("planted")) planted[j["review_id"].get<std::string>()] = j["planted"].get<bool>();
  }
  if (!planted.empty()) {
    std::size_t n_planted = 0, tp = 0, fp = 0;
    for (const auto& [id, p] : planted) n_planted += p;
    for (const auto& f : result["flagged"]) {
      const auto it = planted.find(f["review_id"].get<std::string>());
      if (it != planted.end() && it->second) ++tp;
      else ++fp;
    }
    result["evaluation"] = {{"planted", n_planted},
                            {"true_flags", tp},
                            {"false_flags", fp},
                            {"tpr", n_planted ? ordered_json(double(tp) / double(n_planted)) : ordered_json(nullptr)}};
  }

  row("reviews", std::to_string(result["reviews"].get<std::size_t>()));
  row("set size", std::to_string(result["set_size"].get<std::size_t>()));
  row("alpha", fmt_double(a.alpha));
  row("solver", a.solver);
  row("budget", std::to_string(result["budget"].get<std::size_t>()));
  row("residual", std::to_string(result["residual"].get<std::size_t>()));
  row("discarded reviews", std::to_string(result["discarded_reviews"].size()));
  row("discarded watermarks", std::to_string(result["discarded_watermarks"].size()));
  row("flagged", std::to_string(result["flagged"].size()));
  row("bonferroni flagged", std::to_string(result["bonferroni"].size()));
  row("holm flagged", std::to_string(result["holm"].size()));
  if (result.contains("evaluation")) {
    const auto& e = result["evaluation"];
    row("planted", std::to_string(e["planted"].get<std::size_t>()));
    row("tpr", scalar(e["tpr"]));
    row("false flags", std::to_string(e["false_flags"].get<std::size_t>()));
  }
  for (const auto& f : result["flagged"])
    std::cout << "FLAG\t" << f["review_id"].get<std::string>() << '\t' << f["watermark"].get<std::string>() << '\n';
  if (!g.out.empty()) g.write_artifact(g.out, "detect-batch", result);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config, set, solver;
  std::optional<double> alpha;
  std::optional<std::size_t> tau, rho, omega, trials;
};

int run_simulate(const Globals& g, const SimulateArgs& a, bool seed_given) {
  auto set = load_set(a.set);
  rm_sim_overrides o;
  rm_sim_overrides_init(&o);
  if (seed_given) {
    o.has_seed = 1;
    o.seed = g.seed;
  }
  if (a.alpha) o.alpha = *a.alpha;
  if (a.tau) o.tau = static_cast<std::int64_t>(*a.tau);
  if (a.rho) o.rho = static_cast<std::int64_t>(*a.rho);
  if (a.omega) o.omega = static_cast<std::int64_t>(*a.omega);
  if (a.trials) o.trials = static_cast<std::int64_t>(*a.trials);
  if (!a.solver.empty()) o.solver = parse_solver(a.solver);
  CString json;
  check(rm_simulate(a.config.c_str(), set.get(), &o, &json.p));
  const auto result = ordered_json::parse(json.str());
  print_flat(result);
  if (!g.out.empty()) g.write_artifact(g.out, "simulate", result);
  return kExitOk;
}

// ---------------------------------------------------------------- acquire

struct AcquireArgs {
  std::string task, provider, cassette, paper, cases;
  std::size_t n = 1;
  bool record = false;
};

int run_acquire(const Globals& g, const AcquireArgs& a) {
  const char* cassette = a.cassette.empty() ? nullptr : a.cassette.c_str();
  CString json;
  if (a.task == "generate") {
    if (a.paper.empty()) throw Failure(kExitInput, "--paper is required for generate");
    check(rm_acquire_generate(a.provider.c_str(), a.paper.c_str(), a.n, cassette, a.record, &json.p));
  } else {
    if (a.cases.empty()) throw Failure(kExitInput, "--cases is required for " + a.task);
    if (a.task == "paraphrase")
      check(rm_acquire_paraphrase(a.provider.c_str(), a.cases.c_str(), cassette, a.record, &json.p));
    else
      check(rm_acquire_probe(a.provider.c_str(), a.cases.c_str(), cassette, a.record, &json.p));
  }
  const auto result = ordered_json::parse(json.str());
  if (a.task == "generate") {
    std::size_t i = 0;
    for (const auto& r : result["reviews"]) std::cout << "--- review " << ++i << "\n" << r.get<std::string>() << '\n';
  } else if (a.task == "paraphrase") {
    for (const auto& c : result["cases"])
      std::cout << c["id"].get<std::string>() << '\t' << c["scheme"].get<std::string>() << '\t'
                << (c["original_has"].get<bool>() ? "original" : "-") << '\t'
                << (c["paraphrase_has"].get<bool>() ? "retained" : "lost") << '\n';
    for (auto it = result["retention"].begin(); it != result["retention"].end(); ++it)
      row("retention " + it.key(), scalar((*it)["retention"]));
  } else {
    for (const auto& c : result["cases"])
      std::cout << c["id"].get<std::string>() << '\t' << (c["identified"].get<bool>() ? "identified" : "not identified")
                << '\n';
  }
  row("network calls", std::to_string(result["network_calls"].get<std::size_t>()));
  if (!g.out.empty()) g.write_artifact(g.out, "acquire", result);
  return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::string input, hpsr, registry, set;
  std::size_t replicates = 10000;
};

int run_report(const Globals& g, const ReportArgs& a) {
  const int given = !a.input.empty() + !a.hpsr.empty() + !a.registry.empty();
  if (given != 1) throw Failure(kExitInput, "give exactly one of --input, --hpsr, --registry");
  if (!a.input.empty()) {
    ordered_json j;
    try {
      j = ordered_json::parse(read_all(a.input));
    } catch (const nlohmann::json::exception& e) {
      throw Failure(kExitInput, a.input + ": " + e.what());
    }
    if (j.contains("command")) row("command", scalar(j["command"]));
    if (j.contains("seed")) row("seed", scalar(j["seed"]));
    if (j.contains("created_at")) row("created_at", scalar(j["created_at"]));
    print_flat(j.contains("result") ? j["result"] : j);
    return kExitOk;
  }
  if (!a.hpsr.empty()) {
    CString json;
    check(rm_hpsr_osr_file(a.hpsr.c_str(), a.replicates, g.seed, &json.p));
    const auto result = ordered_json::parse(json.str());
    row("HPSR", result["hpsr"].get<std::string>());
    char osr[64];
    std::snprintf(osr, sizeof osr, "%.2f [%.2f, %.2f]", result["osr"].get<double>(), result["ci_low"].get<double>(),
                  result["ci_high"].get<double>());
    row("OSR (95% CI)", osr);
    if (!g.out.empty()) g.write_artifact(g.out, "report", result);
    return kExitOk;
  }
  auto reg = open_registry(a.registry);
  SetPtr set(nullptr, rm_set_free);
  if (!a.set.empty()) set = load_set(a.set);
  int ok = 0;
  check(rm_registry_verify(reg.get(), &ok));
  CString table;
  check(rm_registry_table(reg.get(), set.get(), &table.p));
  std::cout << table.str();
  row("assignments", std::to_string(rm_registry_assignment_count(reg.get())));
  row("chain", ok ? "intact" : "broken");
  return ok ? kExitOk : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"revmark: watermarking and detection of LLM-generated peer reviews", "revmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rm_version());
  Globals g;
  for (int i = 0; i < argc; ++i) g.argv.emplace_back(argv[i]);
  g.argv[0] = "revmark";
  app.add_option("--seed", g.seed, "Seed for every stochastic step")->capture_default_str();
  app.add_flag("--freeze-timestamps", g.freeze, "Write a fixed timestamp so outputs are byte-identical");
  app.add_option("--out", g.out, "Output artifact path");

  BuildSetArgs bs;
  auto* c_build = app.add_subcommand("build-set", "Construct a watermark candidate set");
  c_build->fallthrough();
  c_build->add_option("--scheme", bs.scheme, "Watermark scheme")
      ->required()
      ->check(CLI::IsMember({"random-start", "technical-term", "random-citation"}));
  c_build->add_option("--surnames", bs.surnames, "Surname list (random-citation)")->check(CLI::ExistingFile);
  c_build->add_option("--year-lo", bs.year_lo, "First citation year")->capture_default_str();
  c_build->add_option("--year-hi", bs.year_hi, "Last citation year")->capture_default_str();
  c_build->add_option("--keywords", bs.keywords, "keyword,count table (technical-term)")->check(CLI::ExistingFile);
  c_build->add_option("--n", bs.n, "Number of rarest keywords")->capture_default_str();

  AssignArgs as;
  auto* c_assign = app.add_subcommand("assign", "Assign watermarks to papers and record them in the registry");
  c_assign->fallthrough();
  c_assign->add_option("--set", as.set, "Watermark set file")->required()->check(CLI::ExistingFile);
  c_assign->add_option("--registry", as.registry, "Registry file (created if missing)")->required();
  c_assign->add_option("--paper", as.papers, "Paper id (repeatable)");
  c_assign->add_option("--papers", as.papers_file, "File with one paper id per line, optional TAB slot")
      ->check(CLI::ExistingFile);
  c_assign->add_option("--slot", as.slot, "Review slot");
  c_assign->add_option("--method", as.method, "Injection method recorded with the assignment");
  c_assign->add_flag("--supersede", as.supersede, "Replace an existing assignment");

  InjectArgs ij;
  auto* c_inject = app.add_subcommand("inject", "Inject a hidden instruction into a PDF (writes --out)");
  c_inject->fallthrough();
  c_inject->add_option("--pdf", ij.pdf, "Input PDF")->required()->check(CLI::ExistingFile);
  c_inject->add_option("--spec", ij.spec, "Injection spec file")->required()->check(CLI::ExistingFile);
  c_inject->add_option("--report", ij.report, "Verification report path (JSON)");

  ScanArgs sc;
  auto* c_scan = app.add_subcommand("scan", "List watermark candidates found in each review");
  c_scan->fallthrough();
  c_scan->add_option("--set", sc.set, "Watermark set file")->required()->check(CLI::ExistingFile);
  c_scan->add_option("--corpus", sc.corpus, "Review corpus (JSON lines)")->required()->check(CLI::ExistingFile);

  SingleArgs sg;
  auto* c_single = app.add_subcommand("detect-single", "Single-review test");
  c_single->fallthrough();
  c_single->add_option("--set", sg.set, "Watermark set file")->required()->check(CLI::ExistingFile);
  auto* o_review = c_single->add_option("--review", sg.review_file, "Review text file")->check(CLI::ExistingFile);
  auto* o_text = c_single->add_option("--text", sg.text, "Review text");
  o_review->excludes(o_text);
  c_single->add_option("--watermark", sg.watermark, "Assigned watermark surface");
  c_single->add_option("--index", sg.index, "Assigned watermark index");
  c_single->add_option("--registry", sg.registry, "Registry to resolve the assignment from");
  c_single->add_option("--paper", sg.paper, "Paper id for registry lookup");
  c_single->add_option("--slot", sg.slot, "Review slot for registry lookup");
  c_single->add_option("--tau", sg.tau, "Candidate-count threshold (default floor(alpha |W|))");
  c_single->add_option("--alpha", sg.alpha, "Target false positive rate")->capture_default_str();

  BatchArgs bt;
  auto* c_batch = app.add_subcommand("detect-batch", "Multi-review test with family-wise error control");
  c_batch->fallthrough();
  c_batch->add_option("--set", bt.set, "Watermark set file")->required()->check(CLI::ExistingFile);
  c_batch->add_option("--corpus", bt.corpus, "Review corpus (JSON lines)")->required()->check(CLI::ExistingFile);
  c_batch->add_option("--registry", bt.registry, "Assignment registry")->required()->check(CLI::ExistingFile);
  c_batch->add_option("--alpha", bt.alpha, "Family-wise error rate")->capture_default_str();
  c_batch->add_option("--tau", bt.tau, "Per-review candidate threshold");
  c_batch->add_option("--rho", bt.rho, "Maximum number of discarded reviews");
  c_batch->add_option("--omega", bt.omega, "Maximum number of discarded watermarks");
  c_batch->add_option("--solver", bt.solver, "Discard solver")
      ->check(CLI::IsMember({"greedy", "exact"}))
      ->capture_default_str();

  SimulateArgs sm;
  auto* c_sim = app.add_subcommand("simulate", "Monte-Carlo FPR / FWER / power experiments");
  c_sim->fallthrough();
  c_sim->add_option("--config", sm.config, "Simulation config (key=value)")->required()->check(CLI::ExistingFile);
  c_sim->add_option("--set", sm.set, "Watermark set file")->required()->check(CLI::ExistingFile);
  c_sim->add_option("--alpha", sm.alpha, "Override alpha");
  c_sim->add_option("--tau", sm.tau, "Override tau");
  c_sim->add_option("--rho", sm.rho, "Override rho");
  c_sim->add_option("--omega", sm.omega, "Override omega");
  c_sim->add_option("--trials", sm.trials, "Override the number of trials");
  c_sim->add_option("--solver", sm.solver, "Override the discard solver")->check(CLI::IsMember({"greedy", "exact"}));

  AcquireArgs aq;
  auto* c_acq = app.add_subcommand("acquire", "Query an LLM provider (or replay a cassette)");
  c_acq->fallthrough();
  c_acq->add_option("--task", aq.task, "What to request")
      ->required()
      ->check(CLI::IsMember({"generate", "paraphrase", "probe"}));
  c_acq->add_option("--provider", aq.provider, "Provider config (key=value)")->required()->check(CLI::ExistingFile);
  c_acq->add_option("--cassette", aq.cassette, "Recorded responses (JSON lines)");
  c_acq->add_flag("--record", aq.record, "Append live responses to the cassette");
  c_acq->add_option("--paper", aq.paper, "Paper text file (generate)")->check(CLI::ExistingFile);
  c_acq->add_option("--n", aq.n, "Number of reviews to generate")->capture_default_str();
  c_acq->add_option("--cases", aq.cases, "Cases file (paraphrase, probe)")->check(CLI::ExistingFile);

  ReportArgs rp;
  auto* c_report = app.add_subcommand("report", "Render artifacts, HPSR/OSR tables, or the registry");
  c_report->fallthrough();
  c_report->add_option("--input", rp.input, "JSON artifact written by another subcommand")->check(CLI::ExistingFile);
  c_report->add_option("--hpsr", rp.hpsr, "CSV item,watermarked,total")->check(CLI::ExistingFile);
  c_report->add_option("--registry", rp.registry, "Registry file")->check(CLI::ExistingFile);
  c_report->add_option("--set", rp.set, "Watermark set for registry surfaces")->check(CLI::ExistingFile);
  c_report->add_option("--replicates", rp.replicates, "Bootstrap replicates")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*c_build) {
      if (g.out.empty()) throw Failure(kExitInput, "--out is required for build-set");
      return run_build_set(g, bs);
    }
    if (*c_assign) return run_assign(g, as);
    if (*c_inject) return run_inject(g, ij);
    if (*c_scan) return run_scan(g, sc);
    if (*c_single) return run_detect_single(g, sg);
    if (*c_batch) return run_detect_batch(g, bt);
    if (*c_sim) return run_simulate(g, sm, app.count("--seed") > 0);
    if (*c_acq) return run_acquire(g, aq);
    if (*c_report) return run_report(g, rp);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what() << '\n';
    return f.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
