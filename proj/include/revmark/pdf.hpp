#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace revmark::pdf {

struct Ref {
  std::uint32_t num = 0;
  std::uint16_t gen = 0;
  friend auto operator<=>(const Ref&, const Ref&) = default;
};

struct Name {
  std::string value;
  friend bool operator==(const Name&, const Name&) = default;
};

struct String {
  std::string bytes;
  bool hex = false;
  friend bool operator==(const String&, const String&) = default;
};

struct Object;
using Array = std::vector<Object>;

// Insertion-ordered dictionary, so re-emitted dictionaries keep their layout.
class Dict {
 public:
  const Object* find(std::string_view key) const;
  Object* find(std::string_view key);
  bool contains(std::string_view key) const { return find(key) != nullptr; }
  void set(std::string key, Object value);
  bool erase(std::string_view key);
  std::size_t size() const noexcept { return items_.size(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  friend bool operator==(const Dict&, const Dict&);

 private:
  std::vector<std::pair<std::string, Object>> items_;
};

struct Stream {
  Dict dict;
  std::string data;  // as stored in the file (still filtered)
  friend bool operator==(const Stream&, const Stream&) = default;
};

struct Null {
  friend bool operator==(const Null&, const Null&) = default;
};

struct Object {
  std::variant<Null, bool, std::int64_t, double, Name, String, Array, Dict, Stream, Ref> value;

  Object() = default;
  template <typename T>
    requires std::is_constructible_v<decltype(value), T&&>
  Object(T&& v) : value(std::forward<T>(v)) {}
  Object(int v) : value(static_cast<std::int64_t>(v)) {}
  Object(std::size_t v) : value(static_cast<std::int64_t>(v)) {}

  template <typename T>
  bool is() const noexcept {
    return std::holds_alternative<T>(value);
  }
  template <typename T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&value);
  }
  template <typename T>
  T* get_if() noexcept {
    return std::get_if<T>(&value);
  }
  bool is_null() const noexcept { return is<Null>(); }
  std::optional<double> number() const;
  std::optional<std::int64_t> integer() const;
  const std::string* name() const;

  friend bool operator==(const Object&, const Object&) = default;
};

inline Object make_name(std::string n) { return Name{std::move(n)}; }

// Serialization in PDF syntax (streams include the stream/endstream body).
std::string serialize(const Object& obj);
std::string serialize_name(std::string_view name);

// Object and content-stream syntax parser over a byte buffer.
class Lexer {
 public:
  explicit Lexer(std::string_view data, std::size_t pos = 0) : data_(data), pos_(pos) {}

  std::size_t pos() const noexcept { return pos_; }
  void seek(std::size_t p) noexcept { pos_ = p; }
  bool at_end();
  void skip_ws();

  // Parses one object; references "n g R" are recognized. Returns nullopt
  // when the next token is a bare keyword (the keyword is left unread).
  std::optional<Object> parse_object();
  // Reads a bare keyword token (operators, obj/endobj, stream...).
  std::string read_keyword();
  std::string peek_keyword();
  std::string_view data() const noexcept { return data_; }

 private:
  Object parse_number();
  std::string parse_name();
  std::string parse_literal_string();
  std::string parse_hex_string();

  std::string_view data_;
  std::size_t pos_;
};

bool is_pdf_whitespace(unsigned char c) noexcept;
bool is_pdf_delimiter(unsigned char c) noexcept;

// Applies the /Filter chain of a stream (Flate with PNG/TIFF-none predictors,
// ASCIIHex). Throws MalformedPdf for unsupported filters or corrupt data.
std::string decode_stream(const Stream& s);
std::string flate_compress(std::string_view data);

struct XrefEntry {
  enum class Kind { Free, Offset, Compressed } kind = Kind::Free;
  std::uint64_t offset = 0;   // byte offset, or containing object stream number
  std::uint32_t index = 0;    // index inside the object stream
  std::uint16_t gen = 0;
};

struct XrefSection {
  std::size_t offset = 0;  // where the section starts
  bool is_stream = false;
  std::map<std::uint32_t, XrefEntry> entries;
  Dict trailer;
};

struct Page {
  Ref ref;
  Dict dict;       // the page dictionary as stored
  Dict resources;  // effective (inherited) resources, resolved one level
  std::optional<std::vector<double>> media_box;
};

// Parsed PDF with an incremental-update writer. Objects added or replaced
// through add_object/replace_object are written after the original bytes.
class Document {
 public:
  static Document parse(std::string bytes);
  // Parses the revision whose cross-reference section starts at xref_offset.
  static Document parse_revision(std::string bytes, std::size_t xref_offset);

  const std::string& bytes() const noexcept { return bytes_; }
  const Dict& trailer() const noexcept { return trailer_; }
  const std::vector<XrefSection>& sections() const noexcept { return sections_; }
  bool uses_xref_stream() const noexcept { return !sections_.empty() && sections_.front().is_stream; }
  bool reconstructed() const noexcept { return reconstructed_; }
  std::size_t startxref() const noexcept { return startxref_; }

  // Resolves references (one level, or fully for Ref chains).
  const Object& resolve(const Object& obj) const;
  const Object& get(Ref r) const;
  bool has_object(std::uint32_t num) const;
  std::uint32_t max_object_number() const;
  // Byte span [begin, end) of an object stored directly in the file.
  std::optional<std::pair<std::size_t, std::size_t>> object_span(std::uint32_t num) const;

  const Dict* resolve_dict(const Object& obj) const;
  const Stream* resolve_stream(const Object& obj) const;

  std::size_t page_count() const { return pages().size(); }
  const std::vector<Page>& pages() const;
  // Decoded and concatenated content streams of a page.
  std::string page_content(const Page& page) const;
  std::vector<Ref> content_refs(const Page& page) const;

  Ref add_object(Object obj);
  void replace_object(Ref r, Object obj);
  bool has_pending() const noexcept { return !pending_.empty(); }

  // Original bytes followed by one incremental update section.
  std::string save_incremental() const;

 private:
  Document() = default;
  void load_from(std::size_t xref_offset);
  void read_xref_chain(std::size_t first_offset);
  std::size_t read_xref_at(std::size_t offset);
  void reconstruct();
  Object load_object(std::uint32_t num) const;
  const std::map<std::uint32_t, std::size_t>& scanned_offsets() const;
  Object parse_indirect_at(std::size_t offset, std::uint32_t expect_num) const;
  void load_pages() const;

  std::string bytes_;
  Dict trailer_;
  std::vector<XrefSection> sections_;  // newest first
  std::map<std::uint32_t, XrefEntry> xref_;
  std::size_t startxref_ = 0;
  bool reconstructed_ = false;

  mutable std::map<std::uint32_t, std::shared_ptr<const Object>> cache_;
  mutable std::map<std::uint32_t, std::vector<std::pair<std::uint32_t, std::size_t>>> objstm_index_;
  mutable std::optional<std::vector<Page>> pages_;
  mutable std::optional<std::map<std::uint32_t, std::size_t>> scanned_;
  std::map<std::uint32_t, std::pair<std::uint16_t, Object>> pending_;
  std::uint32_t next_num_ = 0;
};

Document load_document(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

// Content-stream operation: operands followed by an operator keyword.
struct Operation {
  std::vector<Object> operands;
  std::string op;
};
std::vector<Operation> parse_content(std::string_view content);

}  // namespace revmark::pdf
