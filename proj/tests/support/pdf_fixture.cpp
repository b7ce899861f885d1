#include "pdf_fixture.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace revmark::testing {

namespace {

std::string deflate(const std::string& in) {
  uLongf len = compressBound(static_cast<uLong>(in.size()));
  std::string out(len, '\0');
  if (compress2(reinterpret_cast<Bytef*>(out.data()), &len, reinterpret_cast<const Bytef*>(in.data()),
                static_cast<uLong>(in.size()), 6) != Z_OK)
    throw std::runtime_error("compress2 failed");
  out.resize(len);
  return out;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '(' || c == ')' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string stream_obj(const std::string& content, bool compress) {
  const std::string data = compress ? deflate(content) : content;
  std::string out = "<< /Length " + std::to_string(data.size());
  if (compress) out += " /Filter /FlateDecode";
  out += " >>\nstream\n" + data + "\nendstream";
  return out;
}

}  // namespace

std::string make_fixture_pdf(const std::vector<std::string>& page_texts, const FixtureOptions& opt) {
  // 1 catalog, 2 pages, 3 font, then (page, content) pairs.
  std::map<int, std::string> objs;
  const int n = static_cast<int>(page_texts.size());
  std::string kids;
  for (int i = 0; i < n; ++i) kids += std::to_string(4 + 2 * i) + " 0 R ";
  objs[1] = "<< /Type /Catalog /Pages 2 0 R >>";
  char box[96];
  std::snprintf(box, sizeof box, "[0 0 %g %g]", opt.width, opt.height);
  objs[2] = "<< /Type /Pages /Kids [" + kids + "] /Count " + std::to_string(n) + " /MediaBox " + box + " >>";
  objs[3] = "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding >>";
  for (int i = 0; i < n; ++i) {
    const int page = 4 + 2 * i;
    objs[page] = "<< /Type /Page /Parent 2 0 R /Resources << /Font << /F1 3 0 R >> >> /Contents " +
                 std::to_string(page + 1) + " 0 R >>";
    std::ostringstream c;
    c << "BT\n/F1 12 Tf\n0 0 0 rg\n72 " << (opt.height - 72) << " Td\n(" << escape(page_texts[i])
      << ") Tj\nET\n0.8 g\n72 60 200 10 re f\n";
    objs[page + 1] = stream_obj(c.str(), opt.compress);
  }

  std::string out = "%PDF-1.5\n%\xE2\xE3\xCF\xD3\n";
  std::map<int, std::size_t> offsets;
  for (const auto& [num, body] : objs) {
    offsets[num] = out.size();
    out += std::to_string(num) + " 0 obj\n" + body + "\nendobj\n";
  }
  const int size = static_cast<int>(objs.size()) + 1;
  if (opt.xref == XrefStyle::Table) {
    const std::size_t xref = out.size();
    out += "xref\n0 " + std::to_string(size) + "\n0000000000 65535 f \n";
    for (const auto& [num, off] : offsets) {
      char line[24];
      std::snprintf(line, sizeof line, "%010zu 00000 n \n", off);
      out += line;
    }
    out += "trailer\n<< /Size " + std::to_string(size) + " /Root 1 0 R >>\nstartxref\n" + std::to_string(xref) +
           "\n%%EOF\n";
    return out;
  }
  const int xref_num = size;
  const std::size_t xref = out.size();
  std::string rows;
  auto row = [&](int type, std::size_t field2, int field3) {
    rows += static_cast<char>(type);
    for (int s = 24; s >= 0; s -= 8) rows += static_cast<char>((field2 >> s) & 0xFF);
    rows += static_cast<char>(field3);
  };
  row(0, 0, 0);
  for (const auto& [num, off] : offsets) row(1, off, 0);
  row(1, xref, 0);
  const std::string data = opt.compress ? deflate(rows) : rows;
  out += std::to_string(xref_num) + " 0 obj\n<< /Type /XRef /Size " + std::to_string(size + 1) +
         " /W [1 4 1] /Root 1 0 R /Length " + std::to_string(data.size()) +
         (opt.compress ? " /Filter /FlateDecode" : "") + " >>\nstream\n" + data + "\nendstream\nendobj\n";
  out += "startxref\n" + std::to_string(xref) + "\n%%EOF\n";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace revmark::testing
