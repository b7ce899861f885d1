#pragma once

#include "revmark/watermark.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace revmark {

struct Assignment {
  std::string paper_id;
  std::optional<std::string> review_slot;
  std::string set_id;
  std::size_t index = 0;
  SchemeKind scheme = SchemeKind::RandomStart;
  std::uint64_t seed = 0;
  std::string created_at;
  std::string injection_method;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct CatalogEntry {
  std::string set_id;
  SchemeKind scheme = SchemeKind::RandomStart;
  std::size_t size = 0;
};

struct RegistryRecord {
  enum class Kind : char { Catalog = 'C', Assign = 'A', Supersede = 'S' };
  std::uint64_t seq = 0;
  Kind kind = Kind::Assign;
  Assignment assignment;  // for Catalog records only set_id/scheme and index (= set size) are used
  std::string hash;
};

std::string sha256_hex(std::string_view data);

// Append-only assignment store with a SHA-256 hash chain. Each record's hash
// covers the previous hash and all of the record's fields.
class Registry {
 public:
  static constexpr int kFormatVersion = 1;
  static constexpr std::string_view kGenesis =
      "0000000000000000000000000000000000000000000000000000000000000000";

  void register_set(const WatermarkSet& set);
  bool knows_set(const std::string& set_id) const;
  const CatalogEntry& catalog_entry(const std::string& set_id) const;

  // Throws DuplicateKey unless supersede is set, UnknownSet for an
  // unregistered set id, InvalidArgument for an out-of-range index.
  void record_assignment(const Assignment& a, bool supersede = false);

  // Latest record for exactly this key; NotFound otherwise.
  const Assignment& lookup(const std::string& paper_id,
                           const std::optional<std::string>& review_slot) const;
  // Exact key first, then the paper-level assignment (no slot).
  const Assignment& resolve(const std::string& paper_id,
                            const std::optional<std::string>& review_slot) const;

  const std::vector<RegistryRecord>& records() const noexcept { return records_; }
  std::size_t assignment_count() const noexcept { return latest_.size(); }
  const std::string& head_hash() const noexcept;

  bool verify_chain() const;

  void write(std::ostream& out) const;
  // Validates the chain; throws ChainBroken or ParseError.
  static Registry read(std::istream& in);
  void save(const std::string& path) const;
  static Registry load(const std::string& path);

  // Human-auditable table; redacted mode shows set_id + index only.
  void write_table(std::ostream& out, const WatermarkSet* resolve_surfaces = nullptr) const;
  void write_redacted(std::ostream& out) const;

 private:
  using Key = std::pair<std::string, std::optional<std::string>>;
  void append(RegistryRecord rec);

  std::vector<RegistryRecord> records_;
  std::map<std::string, CatalogEntry> catalog_;
  std::map<Key, std::size_t> latest_;  // key -> index into records_
};

std::string record_payload(const RegistryRecord& rec);
std::string chain_hash(std::string_view prev_hash, const RegistryRecord& rec);

}  // namespace revmark
