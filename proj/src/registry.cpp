#include "revmark/registry.hpp"

#include "revmark/error.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace revmark {

namespace {

constexpr char kSep = '\x1f';
constexpr std::size_t kFieldCount = 13;

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '%': out += "%25"; break;
      case kSep: out += "%1F"; break;
      case '\n': out += "%0A"; break;
      case '\r': out += "%0D"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out += s[i];
      continue;
    }
    unsigned v = 0;
    if (i + 2 >= s.size())
      fail(ErrorCode::ParseError, "truncated escape in registry field");
    const auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
    if (ec != std::errc{} || p != s.data() + i + 3)
      fail(ErrorCode::ParseError, "bad escape in registry field");
    out += static_cast<char>(v);
    i += 2;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, const char* what) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    fail(ErrorCode::ParseError, fmt::format("bad {} '{}' in registry", what, s));
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(kSep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::IoError, "SHA-256 digest failed");
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string record_payload(const RegistryRecord& rec) {
  const Assignment& a = rec.assignment;
  std::string out = fmt::format("{}{}{}{}{}", Registry::kFormatVersion, kSep, rec.seq, kSep,
                                static_cast<char>(rec.kind));
  for (const std::string& f :
       {escape(a.paper_id), std::string(a.review_slot ? "1" : "0"),
        escape(a.review_slot.value_or("")), escape(a.set_id), std::to_string(a.index),
        std::string(scheme_name(a.scheme)), std::to_string(a.seed), escape(a.created_at),
        escape(a.injection_method)}) {
    out += kSep;
    out += f;
  }
  return out;
}

std::string chain_hash(std::string_view prev_hash, const RegistryRecord& rec) {
  std::string data(prev_hash);
  data += kSep;
  data += record_payload(rec);
  return sha256_hex(data);
}

const std::string& Registry::head_hash() const noexcept {
  static const std::string genesis(kGenesis);
  return records_.empty() ? genesis : records_.back().hash;
}

void Registry::append(RegistryRecord rec) {
  rec.seq = records_.size();
  rec.hash = chain_hash(head_hash(), rec);
  records_.push_back(std::move(rec));
}

void Registry::register_set(const WatermarkSet& set) {
  if (catalog_.count(set.id())) return;
  RegistryRecord rec;
  rec.kind = RegistryRecord::Kind::Catalog;
  rec.assignment.set_id = set.id();
  rec.assignment.scheme = set.scheme();
  rec.assignment.index = set.size();
  catalog_[set.id()] = CatalogEntry{set.id(), set.scheme(), set.size()};
  append(std::move(rec));
}

bool Registry::knows_set(const std::string& set_id) const { return catalog_.count(set_id) > 0; }

const CatalogEntry& Registry::catalog_entry(const std::string& set_id) const {
  const auto it = catalog_.find(set_id);
  if (it == catalog_.end()) fail(ErrorCode::UnknownSet, fmt::format("unknown set '{}'", set_id));
  return it->second;
}

void Registry::record_assignment(const Assignment& a, bool supersede) {
  const CatalogEntry& set = catalog_entry(a.set_id);
  if (a.index >= set.size)
    fail(ErrorCode::InvalidArgument,
         fmt::format("index {} out of range for set {} of size {}", a.index, a.set_id, set.size));
  if (a.scheme != set.scheme)
    fail(ErrorCode::SchemeMismatch, fmt::format("assignment scheme {} does not match set {}",
                                                scheme_name(a.scheme), a.set_id));
  Key key{a.paper_id, a.review_slot};
  const bool exists = latest_.count(key) > 0;
  if (exists && !supersede)
    fail(ErrorCode::DuplicateKey,
         fmt::format("assignment for paper '{}' slot '{}' already recorded", a.paper_id,
                     a.review_slot.value_or("-")));
  RegistryRecord rec;
  rec.kind = exists ? RegistryRecord::Kind::Supersede : RegistryRecord::Kind::Assign;
  rec.assignment = a;
  append(std::move(rec));
  latest_[std::move(key)] = records_.size() - 1;
}

const Assignment& Registry::lookup(const std::string& paper_id,
                                   const std::optional<std::string>& review_slot) const {
  const auto it = latest_.find(Key{paper_id, review_slot});
  if (it == latest_.end())
    fail(ErrorCode::NotFound, fmt::format("no assignment for paper '{}' slot '{}'", paper_id,
                                          review_slot.value_or("-")));
  return records_[it->second].assignment;
}

const Assignment& Registry::resolve(const std::string& paper_id,
                                    const std::optional<std::string>& review_slot) const {
  if (review_slot) {
    if (const auto it = latest_.find(Key{paper_id, review_slot}); it != latest_.end())
      return records_[it->second].assignment;
  }
  return lookup(paper_id, std::nullopt);
}

bool Registry::verify_chain() const {
  std::string prev(kGenesis);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].seq != i || chain_hash(prev, records_[i]) != records_[i].hash) return false;
    prev = records_[i].hash;
  }
  return true;
}

void Registry::write(std::ostream& out) const {
  for (const auto& r : records_) out << record_payload(r) << kSep << r.hash << '\n';
}

Registry Registry::read(std::istream& in) {
  Registry reg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kFieldCount)
      fail(ErrorCode::ParseError,
           fmt::format("registry line {}: expected {} fields, got {}", lineno, kFieldCount,
                       f.size()));
    if (parse_number<int>(f[0], "version") != kFormatVersion)
      fail(ErrorCode::ParseError, fmt::format("registry line {}: unsupported version", lineno));
    RegistryRecord rec;
    rec.seq = parse_number<std::uint64_t>(f[1], "sequence number");
    if (f[2].size() != 1 || std::string_view("CAS").find(f[2][0]) == std::string_view::npos)
      fail(ErrorCode::ParseError, fmt::format("registry line {}: bad record kind", lineno));
    rec.kind = static_cast<RegistryRecord::Kind>(f[2][0]);
    Assignment& a = rec.assignment;
    a.paper_id = unescape(f[3]);
    if (f[4] == "1")
      a.review_slot = unescape(f[5]);
    else if (f[4] != "0")
      fail(ErrorCode::ParseError, fmt::format("registry line {}: bad slot flag", lineno));
    a.set_id = unescape(f[6]);
    a.index = parse_number<std::size_t>(f[7], "index");
    a.scheme = parse_scheme(f[8]);
    a.seed = parse_number<std::uint64_t>(f[9], "seed");
    a.created_at = unescape(f[10]);
    a.injection_method = unescape(f[11]);
    rec.hash = std::string(f[12]);
    if (rec.seq != reg.records_.size() || chain_hash(reg.head_hash(), rec) != rec.hash)
      fail(ErrorCode::ChainBroken, fmt::format("hash chain broken at registry line {}", lineno));

    if (rec.kind == RegistryRecord::Kind::Catalog) {
      reg.catalog_[a.set_id] = CatalogEntry{a.set_id, a.scheme, a.index};
    } else {
      Key key{a.paper_id, a.review_slot};
      const bool exists = reg.latest_.count(key) > 0;
      if (!reg.catalog_.count(a.set_id))
        fail(ErrorCode::UnknownSet, fmt::format("registry line {}: unknown set", lineno));
      if (exists != (rec.kind == RegistryRecord::Kind::Supersede))
        fail(ErrorCode::ParseError,
             fmt::format("registry line {}: record kind inconsistent with history", lineno));
      reg.latest_[std::move(key)] = reg.records_.size();
    }
    reg.records_.push_back(std::move(rec));
  }
  return reg;
}

void Registry::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
  write(out);
  if (!out) fail(ErrorCode::IoError, fmt::format("write failed for '{}'", path));
}

Registry Registry::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot read '{}'", path));
  return read(in);
}

void Registry::write_table(std::ostream& out, const WatermarkSet* surfaces) const {
  out << fmt::format("{:>5}  {:<4} {:<20} {:<10} {:<36} {:>7}  {:<20} {:<20} {}\n", "seq",
                     "kind", "paper", "slot", "set", "index", "seed", "created", "method");
  for (const auto& r : records_) {
    const Assignment& a = r.assignment;
    const char* kind = r.kind == RegistryRecord::Kind::Catalog  ? "set"
                       : r.kind == RegistryRecord::Kind::Assign ? "new"
                                                                : "sup";
    out << fmt::format("{:>5}  {:<4} {:<20} {:<10} {:<36} {:>7}  {:<20} {:<20} {}", r.seq, kind,
                       a.paper_id, a.review_slot.value_or("-"), a.set_id, a.index, a.seed,
                       a.created_at, a.injection_method);
    if (surfaces && r.kind != RegistryRecord::Kind::Catalog && a.set_id == surfaces->id() &&
        a.index < surfaces->size())
      out << "  " << (*surfaces)[a.index];
    out << '\n';
  }
  out << "chain " << (verify_chain() ? "ok" : "BROKEN") << " head " << head_hash() << '\n';
}

void Registry::write_redacted(std::ostream& out) const {
  out << "paper\tslot\tset\tindex\n";
  for (const auto& [key, pos] : latest_) {
    const Assignment& a = records_[pos].assignment;
    out << a.paper_id << '\t' << a.review_slot.value_or("-") << '\t' << a.set_id << '\t'
        << a.index << '\n';
  }
}

}  // namespace revmark
