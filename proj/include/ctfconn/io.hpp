#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ctfconn/factorization.hpp"
#include "ctfconn/tensor.hpp"

namespace ctfconn {

using Json = nlohmann::json;

/// One named numeric array of a container; exactly one of real / complex is filled.
struct ArrayBlock {
  std::string name;
  std::string layout;  // "column-major" or "frequency-major"
  std::vector<std::int64_t> shape;
  std::vector<double> real;
  std::vector<cplx> complex;
  bool is_complex = false;

  std::int64_t count() const;
};

/// Binary container:
///   "CTFCONN\0" | u32 version | u64 header length | UTF-8 JSON header | array payloads
/// All integers and payload values are little-endian; complex values are
/// interleaved (re, im). The header lists kind, meta and, per array, name,
/// dtype ("f64" / "c128"), shape, layout and byte offset into the payload.
struct Container {
  std::string kind;
  Json meta = Json::object();
  std::vector<ArrayBlock> arrays;

  const ArrayBlock& array(std::string_view name) const;
};

inline constexpr std::uint32_t kContainerVersion = 1;

std::string encode_container(const Container& c);
/// Throws FormatError with the byte offset of the first inconsistency.
Container decode_container(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

Container read_container(const std::filesystem::path& path);
void write_container(const std::filesystem::path& path, const Container& c);

/// 64-bit FNV-1a of the compact JSON text, as 16 hex digits.
std::string config_hash(const Json& config);

Container tensor_container(const ComplexTensor& x, Json meta = Json::object());
ComplexTensor tensor_from_container(const Container& c);

struct Recording {
  RealMatrix data;  // m x T
  double fs = 0.0;
  Json meta = Json::object();
};

Container recording_container(const Recording& r);
Recording recording_from_container(const Container& c);

Container model_container(const AnyModel& model, Json meta = Json::object());
AnyModel model_from_container(const Container& c);

/// Dense matrix as CSV, one row per line, values in shortest round-trip form.
std::string matrix_csv(const RealMatrix& m);
RealMatrix parse_matrix_csv(std::string_view text);

}  // namespace ctfconn
