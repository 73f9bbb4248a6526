#pragma once

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fracreg/grid.hpp"

namespace fracreg {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError(context + ": not a number: '" + std::string(text) + "'");
  return v;
}

// ---------------------------------------------------------------------------
// CSV: one row per node, "x1[,x2],value", node order.

inline void write_csv(std::ostream& out, const GridFunction& u) {
  const Grid& g = u.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.coord(i);
    out << format_double(x[0]);
    if (g.dim() == 2) out << ',' << format_double(x[1]);
    out << ',' << format_double(u[i]) << '\n';
  }
}

inline void write_csv(const std::string& path, const GridFunction& u) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write_csv(out, u);
}

/// Reads rows in any order; every node of `g` must appear exactly once.
inline GridFunction read_csv(std::istream& in, const Grid& g, const std::string& name = "csv") {
  GridFunction u(g);
  std::vector<char> seen(g.size(), 0);
  std::string line;
  std::size_t lineno = 0, filled = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (auto pos = rest.find(','); pos != std::string_view::npos; pos = rest.find(',')) {
      cells.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    cells.push_back(rest);
    const std::string where = name + ":" + std::to_string(lineno);
    if (cells.size() != static_cast<std::size_t>(g.dim()) + 1)
      throw ConfigError(where + ": expected " + std::to_string(g.dim() + 1) + " columns");
    Point x{0.0, 0.0};
    for (int k = 0; k < g.dim(); ++k) x[k] = parse_double(cells[k], where);
    const Lattice l = g.nearest(x);
    for (int k = 0; k < g.dim(); ++k)
      if (std::abs(x[k] - l[k] * g.spacing()) > 1e-6 * g.spacing())
        throw DomainError(where + ": coordinate is not a grid node");
    const auto idx = g.index(l);
    if (!idx || g.lattice(*idx) != l) throw DomainError(where + ": node outside the grid");
    if (seen[*idx]) throw DomainError(where + ": duplicate node");
    seen[*idx] = 1;
    ++filled;
    u[*idx] = parse_double(cells.back(), where);
  }
  if (filled != g.size())
    throw DomainError(name + ": " + std::to_string(g.size() - filled) + " grid nodes missing");
  return u;
}

inline GridFunction read_csv(const std::string& path, const Grid& g) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  return read_csv(in, g, path);
}

// ---------------------------------------------------------------------------
// Flat binary: little-endian IEEE-754 doubles in node order, no header.

namespace detail {
inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
  return r;
}
}  // namespace detail

inline void write_binary(std::ostream& out, const GridFunction& u) {
  for (double v : u.values()) {
    const auto bits = detail::to_little_endian(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
}

inline void write_binary(const std::string& path, const GridFunction& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  write_binary(out, u);
}

inline GridFunction read_binary(std::istream& in, const Grid& g) {
  std::vector<double> vals(g.size());
  for (auto& v : vals) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw DomainError("binary field is shorter than the grid");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    v = std::bit_cast<double>(detail::to_little_endian(bits));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DomainError("binary field is longer than the grid");
  return GridFunction(g, std::move(vals));
}

inline GridFunction read_binary(const std::string& path, const Grid& g) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  return read_binary(in, g);
}

/// Dispatch on extension: ".bin" is binary, anything else CSV.
inline GridFunction read_field(const std::string& path, const Grid& g) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0) return read_binary(path, g);
  return read_csv(path, g);
}

}  // namespace fracreg
