#pragma once

// Reader/writer for the NPY v1.0 array format restricted to little-endian,
// C-ordered float32 / float64 payloads.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace t2m::npy {

enum class Dtype { F32, F64 };

struct Array {
  std::vector<std::size_t> shape;
  std::variant<std::vector<float>, std::vector<double>> data;

  Dtype dtype() const noexcept {
    return std::holds_alternative<std::vector<float>>(data) ? Dtype::F32 : Dtype::F64;
  }
  std::size_t size() const noexcept;
  std::size_t rank() const noexcept { return shape.size(); }
  /// Element values widened to double, in C order.
  std::vector<double> to_f64() const;
};

Array make_f64(std::vector<std::size_t> shape, std::vector<double> values);
Array make_f32(std::vector<std::size_t> shape, std::vector<float> values);

/// Parses a complete NPY file image. Throws t2m::Error with MagicMismatch,
/// UnsupportedDtype, FortranOrderUnsupported or ShapeHeaderMalformed.
Array parse(std::string_view bytes);

/// Reads and parses `path`; a missing file raises MissingFile.
Array load(const std::filesystem::path& path);

std::string serialize(const Array& array);
void save(const std::filesystem::path& path, const Array& array);

}  // namespace t2m::npy
