#pragma once
// On-disk formats. Three commitments drive everything here:
//   1. field dumps are little-endian binary with a fixed header
//      ("NFH1", u32 dim, u32 macro points per axis, f64 half width,
//      u32 cell points per axis with 0 meaning macro-only) followed by the
//      float64 values in row-major layout, plus a human-readable sidecar
//      <path>.meta;
//   2. reports are CSV with doubles printed as %.17g, which round-trips
//      every finite double bit-exactly;
//   3. every write is atomic (write to <path>.tmp, then rename), so a
//      crashed run never leaves a half-written artifact behind.
// Nothing time- or machine-dependent is ever serialized: identical inputs
// produce byte-identical files.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfh/grid.hpp"
#include "nfh/sigma.hpp"

namespace nfh {

namespace detail {

static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

inline void append_le(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline void append_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

class ByteReader {
 public:
  ByteReader(std::string data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(b)])) << (8 * b);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(b)])) << (8 * b);
    pos_ += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  void raw(char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& name() const { return name_; }

 private:
  void need(std::size_t n) {
    if (data_.size() - pos_ < n)
      throw std::runtime_error("field load: " + name_ + " is truncated");
  }
  std::string data_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Write `content` to `path` atomically: the file appears fully written or
// not at all.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

// %.17g: shortest form that still recovers the exact double on parse.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- binary field dumps -----------------------------------------------------

struct LoadedField {
  int dim = 1;
  int macro_points = 0;
  double half_width = 0.0;
  int cell_points = 0;  // 0: plain macro field
  std::vector<double> values;

  bool two_scale() const { return cell_points > 0; }

  MacroField as_macro() const {
    if (two_scale()) throw std::runtime_error("field load: dump holds a two-scale field");
    return MacroField{MacroGrid{dim, half_width, macro_points}, values};
  }

  TwoScaleField as_two_scale() const {
    if (!two_scale()) throw std::runtime_error("field load: dump holds a macro-only field");
    return TwoScaleField{MacroGrid{dim, half_width, macro_points}, CellGrid{dim, cell_points},
                         values};
  }
};

namespace detail {

inline std::string encode_field(int dim, int m, double half_width, int my,
                                std::span<const double> values) {
  std::string out;
  out.reserve(24 + 8 * values.size());
  out += "NFH1";
  append_le(out, static_cast<std::uint32_t>(dim));
  append_le(out, static_cast<std::uint32_t>(m));
  append_le(out, half_width);
  append_le(out, static_cast<std::uint32_t>(my));
  for (double v : values) append_le(out, v);
  return out;
}

inline void write_meta(const std::filesystem::path& path, int dim, int m, double half_width,
                       int my, std::size_t count) {
  std::string meta;
  meta += "format: NFH1\n";
  meta += "dim: " + std::to_string(dim) + "\n";
  meta += "macro_points: " + std::to_string(m) + "\n";
  meta += "half_width: " + format_double(half_width) + "\n";
  meta += "cell_points: " + std::to_string(my) + "\n";
  meta += "value_count: " + std::to_string(count) + "\n";
  meta += "value_type: float64 little-endian row-major\n";
  write_file_atomic(path.string() + ".meta", meta);
}

}  // namespace detail

inline void write_field(const std::filesystem::path& path, const MacroField& u) {
  u.grid.validate();
  write_file_atomic(path, detail::encode_field(u.grid.dim, u.grid.points, u.grid.half_width, 0,
                                               u.values));
  detail::write_meta(path, u.grid.dim, u.grid.points, u.grid.half_width, 0, u.values.size());
}

inline void write_field(const std::filesystem::path& path, const TwoScaleField& u) {
  u.macro.validate();
  u.cell.validate();
  write_file_atomic(path, detail::encode_field(u.macro.dim, u.macro.points, u.macro.half_width,
                                               u.cell.points, u.values));
  detail::write_meta(path, u.macro.dim, u.macro.points, u.macro.half_width, u.cell.points,
                     u.values.size());
}

inline LoadedField read_field(const std::filesystem::path& path) {
  detail::ByteReader r(read_file(path), path.string());
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, "NFH1", 4) != 0)
    throw std::runtime_error("field load: " + path.string() + " lacks the NFH1 magic");
  LoadedField f;
  f.dim = static_cast<int>(r.u32());
  f.macro_points = static_cast<int>(r.u32());
  f.half_width = r.f64();
  f.cell_points = static_cast<int>(r.u32());
  if (f.dim < 1 || f.dim > 2)
    throw std::runtime_error("field load: unsupported dimension in " + path.string());
  std::size_t count = 1;
  for (int a = 0; a < f.dim; ++a) count *= static_cast<std::size_t>(f.macro_points);
  if (f.cell_points > 0)
    for (int a = 0; a < f.dim; ++a) count *= static_cast<std::size_t>(f.cell_points);
  if (r.remaining() != 8 * count)
    throw std::runtime_error("field load: " + path.string() + " value payload has wrong size");
  f.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) f.values[i] = r.f64();
  return f;
}

// ---- CSV reports ------------------------------------------------------------

inline void write_pairing_csv(const std::filesystem::path& path, const PairingReport& r) {
  std::string out = "eps,pairing,limit,abs_error\n";
  for (std::size_t k = 0; k < r.eps.size(); ++k) {
    out += format_double(r.eps[k]) + "," + format_double(r.pairing[k]) + "," +
           format_double(r.limit) + "," + format_double(r.abs_error[k]) + "\n";
  }
  write_file_atomic(path, out);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(what + ": cannot parse '" + s + "' as a number");
  }
}

}  // namespace detail

inline PairingReport read_pairing_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || detail::split_csv_line(line) !=
                                     std::vector<std::string>{"eps", "pairing", "limit", "abs_error"})
    throw std::runtime_error("pairing load: " + path.string() + " has an unexpected header");
  PairingReport r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 4)
      throw std::runtime_error("pairing load: " + path.string() + " row has wrong arity");
    r.eps.push_back(detail::parse_double(cells[0], path.string()));
    r.pairing.push_back(detail::parse_double(cells[1], path.string()));
    r.limit = detail::parse_double(cells[2], path.string());
    r.abs_error.push_back(detail::parse_double(cells[3], path.string()));
  }
  r.fitted_rate = detail::fit_decay_rate(r.eps, r.abs_error);
  return r;
}

// Generic column table, used for per-slice norms and corrector errors.
inline void write_table_csv(const std::filesystem::path& path,
                            const std::vector<std::string>& columns,
                            const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c)
    out += (c ? "," : "") + columns[c];
  out += "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::invalid_argument("csv write: row arity does not match the header");
    for (std::size_t c = 0; c < row.size(); ++c)
      out += (c ? "," : "") + format_double(row[c]);
    out += "\n";
  }
  write_file_atomic(path, out);
}

inline std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_table_csv(
    const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv load: " + path.string() + " is empty");
  const std::vector<std::string> columns = detail::split_csv_line(line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != columns.size())
      throw std::runtime_error("csv load: " + path.string() + " row has wrong arity");
    std::vector<double> row;
    for (const auto& cell : cells) row.push_back(detail::parse_double(cell, path.string()));
    rows.push_back(std::move(row));
  }
  return {columns, rows};
}

// ---- structured summary records ---------------------------------------------

// One "key: value" line per entry, in insertion order.
inline void write_summary(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [key, value] : entries) out += key + ": " + value + "\n";
  write_file_atomic(path, out);
}

inline std::map<std::string, std::string> read_summary(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::map<std::string, std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto colon = line.find(": ");
    if (colon == std::string::npos)
      throw std::runtime_error("summary load: " + path.string() + " line lacks 'key: value' shape");
    entries[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return entries;
}

}  // namespace nfh
