#include "ctfconn/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ctfconn/errors.hpp"

namespace ctfconn {

static_assert(std::endian::native == std::endian::little, "container payloads are written in host byte order");

namespace {

constexpr char kMagic[8] = {'C', 'T', 'F', 'C', 'O', 'N', 'N', '\0'};
constexpr std::size_t kPreamble = 8 + 4 + 8;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t at) {
  T v;
  std::memcpy(&v, bytes.data() + at, sizeof(T));
  return v;
}

ArrayBlock real_block(std::string name, const RealMatrix& m) {
  ArrayBlock b;
  b.name = std::move(name);
  b.layout = "column-major";
  b.shape = {m.rows(), m.cols()};
  b.real.assign(m.data(), m.data() + m.size());
  return b;
}

ArrayBlock complex_block(std::string name, const ComplexMatrix& m) {
  ArrayBlock b;
  b.name = std::move(name);
  b.layout = "column-major";
  b.shape = {m.rows(), m.cols()};
  b.complex.assign(m.data(), m.data() + m.size());
  b.is_complex = true;
  return b;
}

void expect_matrix(const ArrayBlock& b, bool is_complex) {
  if (b.is_complex != is_complex || b.shape.size() != 2 || b.layout != "column-major") {
    throw InvalidInput("container array '" + b.name + "' has an unexpected type or shape");
  }
}

RealMatrix real_matrix(const ArrayBlock& b) {
  expect_matrix(b, false);
  return Eigen::Map<const RealMatrix>(b.real.data(), b.shape[0], b.shape[1]);
}

ComplexMatrix complex_matrix(const ArrayBlock& b) {
  expect_matrix(b, true);
  return Eigen::Map<const ComplexMatrix>(b.complex.data(), b.shape[0], b.shape[1]);
}

}  // namespace

std::int64_t ArrayBlock::count() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

const ArrayBlock& Container::array(std::string_view name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  throw InvalidInput("container has no array '" + std::string(name) + "'");
}

std::string encode_container(const Container& c) {
  Json header;
  header["kind"] = c.kind;
  header["meta"] = c.meta;
  header["arrays"] = Json::array();
  std::uint64_t offset = 0;
  for (const auto& a : c.arrays) {
    const auto expected = static_cast<std::size_t>(a.count());
    if ((a.is_complex ? a.complex.size() : a.real.size()) != expected) {
      throw InvalidInput("array '" + a.name + "' does not match its shape");
    }
    const std::uint64_t bytes = expected * (a.is_complex ? sizeof(cplx) : sizeof(double));
    header["arrays"].push_back({{"name", a.name},
                                {"dtype", a.is_complex ? "c128" : "f64"},
                                {"shape", a.shape},
                                {"layout", a.layout},
                                {"offset", offset},
                                {"bytes", bytes}});
    offset += bytes;
  }
  const std::string text = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kContainerVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  out.reserve(out.size() + offset);
  for (const auto& a : c.arrays) {
    const char* p = a.is_complex ? reinterpret_cast<const char*>(a.complex.data())
                                 : reinterpret_cast<const char*>(a.real.data());
    out.append(p, a.is_complex ? a.complex.size() * sizeof(cplx) : a.real.size() * sizeof(double));
  }
  return out;
}

Container decode_container(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a ctfconn container (bad magic)", 0);
  }
  if (bytes.size() < kPreamble) throw FormatError("truncated container preamble", bytes.size());
  const auto version = get<std::uint32_t>(bytes, 8);
  if (version != kContainerVersion) throw FormatError("unsupported container version " + std::to_string(version), 8);
  const auto header_len = get<std::uint64_t>(bytes, 12);
  if (header_len > bytes.size() - kPreamble) throw FormatError("header length exceeds file size", 12);

  Json header;
  try {
    header = Json::parse(bytes.substr(kPreamble, header_len));
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("malformed container header: ") + e.what(), kPreamble + (e.byte > 0 ? e.byte - 1 : 0));
  }

  const std::size_t payload = kPreamble + header_len;
  Container c;
  std::uint64_t expected_offset = 0;
  try {
    c.kind = header.at("kind").get<std::string>();
    c.meta = header.at("meta");
    for (const auto& entry : header.at("arrays")) {
      ArrayBlock a;
      a.name = entry.at("name").get<std::string>();
      a.layout = entry.at("layout").get<std::string>();
      a.shape = entry.at("shape").get<std::vector<std::int64_t>>();
      const auto dtype = entry.at("dtype").get<std::string>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto n_bytes = entry.at("bytes").get<std::uint64_t>();
      if (dtype != "f64" && dtype != "c128") throw FormatError("unknown dtype '" + dtype + "'", kPreamble);
      a.is_complex = dtype == "c128";
      for (auto d : a.shape)
        if (d < 0) throw FormatError("negative array extent in '" + a.name + "'", kPreamble);
      const std::uint64_t width = a.is_complex ? sizeof(cplx) : sizeof(double);
      if (offset != expected_offset || n_bytes != static_cast<std::uint64_t>(a.count()) * width) {
        throw FormatError("array '" + a.name + "' has inconsistent offset or size", payload + expected_offset);
      }
      if (offset + n_bytes > bytes.size() - payload) {
        throw FormatError("array '" + a.name + "' truncated", bytes.size());
      }
      const char* src = bytes.data() + payload + offset;
      if (a.is_complex) {
        a.complex.resize(static_cast<std::size_t>(a.count()));
        std::memcpy(a.complex.data(), src, n_bytes);
      } else {
        a.real.resize(static_cast<std::size_t>(a.count()));
        std::memcpy(a.real.data(), src, n_bytes);
      }
      expected_offset += n_bytes;
      c.arrays.push_back(std::move(a));
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("invalid container header: ") + e.what(), kPreamble);
  }
  if (payload + expected_offset != bytes.size()) {
    throw FormatError("trailing bytes after the last array", payload + expected_offset);
  }
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed", path.string());
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing", path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write failed", path.string());
}

Container read_container(const std::filesystem::path& path) {
  try {
    return decode_container(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.reason(), e.offset());
  }
}

void write_container(const std::filesystem::path& path, const Container& c) { write_file(path, encode_container(c)); }

std::string config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Container tensor_container(const ComplexTensor& x, Json meta) {
  Container c;
  c.kind = "tensor";
  c.meta = std::move(meta);
  ArrayBlock b;
  b.name = "X";
  b.layout = "frequency-major";
  b.shape = {x.channels(), x.frequencies(), x.trials()};
  b.complex.assign(x.data().begin(), x.data().end());
  b.is_complex = true;
  c.arrays.push_back(std::move(b));
  return c;
}

ComplexTensor tensor_from_container(const Container& c) {
  if (c.kind != "tensor") throw InvalidInput("expected a tensor container, found '" + c.kind + "'");
  const ArrayBlock& b = c.array("X");
  if (!b.is_complex || b.shape.size() != 3 || b.layout != "frequency-major") {
    throw InvalidInput("tensor array must be c128, 3-D and frequency-major");
  }
  return ComplexTensor({b.shape[0], b.shape[1], b.shape[2]}, b.complex);
}

Container recording_container(const Recording& r) {
  Container c;
  c.kind = "recording";
  c.meta = r.meta;
  c.meta["fs"] = r.fs;
  c.arrays.push_back(real_block("data", r.data));
  return c;
}

Recording recording_from_container(const Container& c) {
  if (c.kind != "recording") throw InvalidInput("expected a recording container, found '" + c.kind + "'");
  Recording r;
  r.data = real_matrix(c.array("data"));
  r.meta = c.meta;
  try {
    r.fs = c.meta.at("fs").get<double>();
  } catch (const Json::exception&) {
    throw InvalidInput("recording container lacks a sampling rate");
  }
  r.meta.erase("fs");
  return r;
}

Container model_container(const AnyModel& model, Json meta) {
  Container c;
  c.kind = "model";
  c.meta = std::move(meta);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        c.arrays.push_back(real_block("A", m.A));
        c.arrays.push_back(complex_block("P", m.P));
        if constexpr (std::is_same_v<M, ParafacModel>) {
          c.meta["algo"] = "parafac";
          c.arrays.push_back(complex_block("Y", m.Y));
        } else {
          c.meta["algo"] = "parafac2";
          c.arrays.push_back(complex_block("H", m.H));
          for (std::size_t f = 0; f < m.Q.size(); ++f) c.arrays.push_back(complex_block("Q" + std::to_string(f), m.Q[f]));
        }
      },
      model);
  return c;
}

AnyModel model_from_container(const Container& c) {
  if (c.kind != "model") throw InvalidInput("expected a model container, found '" + c.kind + "'");
  const std::string algo = c.meta.value("algo", "");
  RealMatrix a = real_matrix(c.array("A"));
  ComplexMatrix p = complex_matrix(c.array("P"));
  if (p.cols() != a.cols()) throw InvalidInput("model factors disagree on the rank");
  if (parse_algorithm(algo) == Algorithm::parafac) {
    ParafacModel m{std::move(a), std::move(p), complex_matrix(c.array("Y"))};
    if (m.Y.cols() != m.A.cols()) throw InvalidInput("model factors disagree on the rank");
    return m;
  }
  Parafac2Model m{std::move(a), std::move(p), complex_matrix(c.array("H")), {}};
  for (Index f = 0; f < m.P.rows(); ++f) {
    m.Q.push_back(complex_matrix(c.array("Q" + std::to_string(f))));
    if (m.Q.back().cols() != m.A.cols() || m.Q.back().rows() != m.Q.front().rows()) {
      throw InvalidInput("model factors disagree on the rank");
    }
  }
  if (m.H.rows() != m.A.cols() || m.H.cols() != m.A.cols()) throw InvalidInput("model factors disagree on the rank");
  return m;
}

std::string matrix_csv(const RealMatrix& m) {
  std::string out;
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      const auto res = std::to_chars(buf, buf + sizeof(buf), m(i, j));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

RealMatrix parse_matrix_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      std::vector<double> row;
      std::size_t p = 0;
      while (true) {
        std::size_t q = line.find(',', p);
        if (q == std::string_view::npos) q = line.size();
        double v = 0.0;
        const auto res = std::from_chars(line.data() + p, line.data() + q, v);
        if (res.ec != std::errc() || res.ptr != line.data() + q) {
          throw InvalidInput("CSV line " + std::to_string(rows.size() + 1) + ": not a number");
        }
        row.push_back(v);
        if (q == line.size()) break;
        p = q + 1;
      }
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw InvalidInput("CSV line " + std::to_string(rows.size() + 1) + ": ragged row");
      }
      rows.push_back(std::move(row));
    }
    pos = end + 1;
  }
  RealMatrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

}  // namespace ctfconn
