#include "t2m/npy.hpp"

#include "t2m/error.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <optional>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are copied verbatim; big-endian hosts are unsupported");

namespace t2m::npy {
namespace {

constexpr std::string_view kMagic = "\x93NUMPY";

[[noreturn]] void malformed(const std::string& why) {
  throw Error(Errc::ShapeHeaderMalformed, why);
}

struct HeaderDict {
  std::optional<std::string> descr;
  std::optional<bool> fortran_order;
  std::optional<std::vector<std::size_t>> shape;
};

// Parser for the Python dict literal that numpy writes into the header.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : s_(text) {}

  HeaderDict parse() {
    HeaderDict dict;
    skip_ws();
    expect('{');
    for (;;) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      std::string key = quoted();
      skip_ws();
      expect(':');
      skip_ws();
      if (key == "descr") {
        dict.descr = quoted();
      } else if (key == "fortran_order") {
        dict.fortran_order = boolean();
      } else if (key == "shape") {
        dict.shape = tuple();
      } else {
        skip_value();
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        malformed("expected ',' or '}' in header dict");
      }
    }
    return dict;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) malformed(std::string("expected '") + c + "' in header");
    ++pos_;
  }

  std::string quoted() {
    const char q = peek();
    if (q != '\'' && q != '"') malformed("expected quoted string in header");
    ++pos_;
    const auto end = s_.find(q, pos_);
    if (end == std::string_view::npos) malformed("unterminated string in header");
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  bool boolean() {
    if (s_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    malformed("expected True/False in header");
  }

  std::vector<std::size_t> tuple() {
    expect('(');
    std::vector<std::size_t> dims;
    for (;;) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) malformed("non-integer shape entry");
      std::size_t v = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        v = v * 10 + static_cast<std::size_t>(peek() - '0');
        ++pos_;
      }
      // numpy sometimes writes 3L on old pythons
      if (peek() == 'L') ++pos_;
      dims.push_back(v);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        malformed("expected ',' or ')' in shape tuple");
      }
    }
  }

  void skip_value() {
    int depth = 0;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '\'' || c == '"') {
        quoted();
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') {
        if (depth == 0) return;
        --depth;
      }
      if (c == ',' && depth == 0) return;
      ++pos_;
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string shape_literal(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  if (shape.size() == 1) os << ',';
  os << ')';
  return os.str();
}

}  // namespace

std::size_t Array::size() const noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::vector<double> Array::to_f64() const {
  if (const auto* d = std::get_if<std::vector<double>>(&data)) return *d;
  const auto& f = std::get<std::vector<float>>(data);
  return {f.begin(), f.end()};
}

Array make_f64(std::vector<std::size_t> shape, std::vector<double> values) {
  Array a{std::move(shape), std::move(values)};
  if (a.size() != std::get<std::vector<double>>(a.data).size()) {
    malformed("value count does not match shape");
  }
  return a;
}

Array make_f32(std::vector<std::size_t> shape, std::vector<float> values) {
  Array a{std::move(shape), std::move(values)};
  if (a.size() != std::get<std::vector<float>>(a.data).size()) {
    malformed("value count does not match shape");
  }
  return a;
}

Array parse(std::string_view bytes) {
  if (bytes.size() < 10 || bytes.substr(0, 6) != kMagic) {
    throw Error(Errc::MagicMismatch, "missing \\x93NUMPY magic");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t header_start = 0;
  if (major == 1) {
    header_len = static_cast<unsigned char>(bytes[8]) |
                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    header_start = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) malformed("truncated v2 header length");
    for (int i = 3; i >= 0; --i) {
      header_len = (header_len << 8) | static_cast<unsigned char>(bytes[8 + i]);
    }
    header_start = 12;
  } else {
    malformed("unsupported NPY version " + std::to_string(major));
  }
  if (bytes.size() < header_start + header_len) malformed("truncated header");

  const HeaderDict dict =
      HeaderParser(bytes.substr(header_start, header_len)).parse();
  if (!dict.descr || !dict.fortran_order || !dict.shape) {
    malformed("header lacks descr, fortran_order or shape");
  }
  std::size_t width = 0;
  if (*dict.descr == "<f4") {
    width = 4;
  } else if (*dict.descr == "<f8") {
    width = 8;
  } else {
    throw Error(Errc::UnsupportedDtype, "descr '" + *dict.descr + "'");
  }
  if (*dict.fortran_order) {
    throw Error(Errc::FortranOrderUnsupported, "fortran_order=True");
  }

  Array out;
  out.shape = *dict.shape;
  const std::size_t count = out.size();
  const std::string_view payload = bytes.substr(header_start + header_len);
  if (payload.size() != count * width) {
    malformed("shape " + shape_literal(out.shape) + " needs " +
              std::to_string(count * width) + " payload bytes, found " +
              std::to_string(payload.size()));
  }
  if (width == 4) {
    std::vector<float> v(count);
    if (count) std::memcpy(v.data(), payload.data(), payload.size());
    out.data = std::move(v);
  } else {
    std::vector<double> v(count);
    if (count) std::memcpy(v.data(), payload.data(), payload.size());
    out.data = std::move(v);
  }
  return out;
}

Array load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + std::string(e.what()));
  }
}

std::string serialize(const Array& array) {
  std::string dict = "{'descr': '";
  dict += array.dtype() == Dtype::F32 ? "<f4" : "<f8";
  dict += "', 'fortran_order': False, 'shape': " + shape_literal(array.shape) + ", }";
  // magic(6) + version(2) + len(2) + dict + padding + '\n' aligned to 64
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict.push_back('\n');

  std::string out(kMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(dict.size() & 0xff));
  out.push_back(static_cast<char>((dict.size() >> 8) & 0xff));
  out += dict;
  std::visit(
      [&](const auto& v) {
        out.append(reinterpret_cast<const char*>(v.data()),
                   v.size() * sizeof(typename std::decay_t<decltype(v)>::value_type));
      },
      array.data);
  return out;
}

void save(const std::filesystem::path& path, const Array& array) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::MissingFile, "cannot write " + path.string());
  const std::string bytes = serialize(array);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace t2m::npy
