#include "revmark/error.hpp"
#include "revmark/pdf.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <cstdint>
#include <cstdlib>

namespace revmark::pdf {

namespace {

std::string inflate_data(std::string_view in) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) fail(ErrorCode::MalformedPdf, "zlib init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  std::string out;
  char buf[16384];
  int rc = Z_OK;
  while (rc == Z_OK) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    out.append(buf, sizeof buf - zs.avail_out);
    if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
  }
  inflateEnd(&zs);
  if (rc != Z_STREAM_END && out.empty())
    fail(ErrorCode::MalformedPdf, fmt::format("corrupt Flate stream (zlib {})", rc));
  return out;
}

std::string ascii_hex_decode(std::string_view in) {
  std::string out;
  int high = -1;
  for (const char c : in) {
    if (c == '>') break;
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else continue;
    if (high < 0) {
      high = v;
    } else {
      out += static_cast<char>((high << 4) | v);
      high = -1;
    }
  }
  if (high >= 0) out += static_cast<char>(high << 4);
  return out;
}

std::string ascii85_decode(std::string_view in) {
  std::string out;
  std::uint32_t group = 0;
  int n = 0;
  auto flush = [&](int bytes) {
    for (int k = 0; k < bytes; ++k) out += static_cast<char>((group >> (24 - 8 * k)) & 0xFF);
  };
  std::size_t i = 0;
  if (in.substr(0, 2) == "<~") i = 2;
  for (; i < in.size(); ++i) {
    const char c = in[i];
    if (c == '~') break;
    if (c == 'z' && n == 0) {
      out.append(4, '\0');
      continue;
    }
    if (c < '!' || c > 'u') continue;
    group = group * 85 + static_cast<std::uint32_t>(c - '!');
    if (++n == 5) {
      flush(4);
      group = 0;
      n = 0;
    }
  }
  if (n == 1) fail(ErrorCode::MalformedPdf, "truncated ASCII85 group");
  if (n > 0) {
    for (int k = n; k < 5; ++k) group = group * 85 + 84;
    flush(n - 1);
  }
  return out;
}

std::string png_unpredict(std::string_view in, int colors, int bpc, int columns) {
  const std::size_t bpp = std::max<std::size_t>(1, static_cast<std::size_t>(colors * bpc + 7) / 8);
  const std::size_t row_len = static_cast<std::size_t>(columns * colors * bpc + 7) / 8;
  std::string out;
  std::string prev(row_len, '\0');
  std::size_t p = 0;
  while (p < in.size()) {
    const auto type = static_cast<unsigned char>(in[p++]);
    std::string row(in.substr(p, row_len));
    row.resize(row_len, '\0');
    p += row_len;
    for (std::size_t i = 0; i < row_len; ++i) {
      const int a = i >= bpp ? static_cast<unsigned char>(row[i - bpp]) : 0;
      const int b = static_cast<unsigned char>(prev[i]);
      const int c = i >= bpp ? static_cast<unsigned char>(prev[i - bpp]) : 0;
      int x = static_cast<unsigned char>(row[i]);
      switch (type) {
        case 0: break;
        case 1: x += a; break;
        case 2: x += b; break;
        case 3: x += (a + b) / 2; break;
        case 4: {
          const int pa = std::abs(b - c), pb = std::abs(a - c), pc = std::abs(a + b - 2 * c);
          x += (pa <= pb && pa <= pc) ? a : (pb <= pc ? b : c);
          break;
        }
        default:
          fail(ErrorCode::MalformedPdf, fmt::format("unknown PNG predictor {}", type));
      }
      row[i] = static_cast<char>(x & 0xFF);
    }
    out += row;
    prev = std::move(row);
  }
  return out;
}

std::string apply_predictor(std::string data, const Object* parms) {
  const Dict* d = parms ? parms->get_if<Dict>() : nullptr;
  if (!d) return data;
  auto int_of = [&](const char* key, int def) {
    const Object* o = d->find(key);
    const auto v = o ? o->integer() : std::nullopt;
    return v ? static_cast<int>(*v) : def;
  };
  const int predictor = int_of("Predictor", 1);
  if (predictor < 10) {
    if (predictor == 1) return data;
    fail(ErrorCode::MalformedPdf, fmt::format("unsupported predictor {}", predictor));
  }
  return png_unpredict(data, int_of("Colors", 1), int_of("BitsPerComponent", 8),
                       int_of("Columns", 1));
}

}  // namespace

std::string decode_stream(const Stream& s) {
  std::vector<std::string> filters;
  std::vector<const Object*> parms;
  const Object* f = s.dict.find("Filter");
  const Object* p = s.dict.find("DecodeParms");
  if (f) {
    if (const auto* n = f->name()) {
      filters.push_back(*n);
      parms.push_back(p);
    } else if (const auto* a = f->get_if<Array>()) {
      const Array* pa = p ? p->get_if<Array>() : nullptr;
      for (std::size_t i = 0; i < a->size(); ++i) {
        if (const auto* n = (*a)[i].name()) filters.push_back(*n);
        parms.push_back(pa && i < pa->size() ? &(*pa)[i] : nullptr);
      }
    }
  }
  std::string data = s.data;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    const std::string& name = filters[i];
    if (name == "FlateDecode" || name == "Fl") {
      data = apply_predictor(inflate_data(data), parms[i]);
    } else if (name == "ASCIIHexDecode" || name == "AHx") {
      data = ascii_hex_decode(data);
    } else if (name == "ASCII85Decode" || name == "A85") {
      data = ascii85_decode(data);
    } else {
      fail(ErrorCode::MalformedPdf, fmt::format("unsupported stream filter {}", name));
    }
  }
  return data;
}

std::string flate_compress(std::string_view data) {
  uLongf len = compressBound(static_cast<uLong>(data.size()));
  std::string out(len, '\0');
  if (compress2(reinterpret_cast<Bytef*>(out.data()), &len,
                reinterpret_cast<const Bytef*>(data.data()), static_cast<uLong>(data.size()),
                Z_BEST_COMPRESSION) != Z_OK)
    fail(ErrorCode::IoError, "zlib compression failed");
  out.resize(len);
  return out;
}

}  // namespace revmark::pdf
