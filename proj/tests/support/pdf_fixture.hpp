#pragma once

#include <string>
#include <vector>

namespace revmark::testing {

enum class XrefStyle { Table, Stream };

struct FixtureOptions {
  XrefStyle xref = XrefStyle::Table;
  bool compress = false;
  double width = 612, height = 792;
};

// Minimal but well-formed PDF: one Helvetica text line per entry of
// page_texts (ASCII only), written without any revmark code.
std::string make_fixture_pdf(const std::vector<std::string>& page_texts, const FixtureOptions& opt = {});

std::string read_file(const std::string& path);
void write_bytes(const std::string& path, const std::string& bytes);

}  // namespace revmark::testing
