#pragma once

// Dataset CSV format: a header row, then one observation per row. The column
// named "y" is the response; every other column is a predictor, in file order.

#include "samm/error.hpp"
#include "samm/locallinear.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace samm {

/// Malformed CSV input; `line()` is 1-based.
class ParseError : public Error
{
public:
  ParseError(std::size_t line, const std::string& what)
    : Error(what), line_(line)
  {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return out;
}

} // namespace detail

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct NamedDataset
{
  Dataset data;
  std::vector<std::string> predictor_names;
};

inline NamedDataset read_csv(std::istream& in)
{
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty())
      break;
  }
  if (detail::trim(line).empty())
    throw ParseError(lineno, "empty input: expected a header row");
  for (auto f : detail::split_fields(line))
    header.emplace_back(f);

  std::ptrdiff_t y_col = -1;
  NamedDataset out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") {
      if (y_col >= 0)
        throw ParseError(lineno, "line " + std::to_string(lineno) + ": header has more than one 'y' column");
      y_col = static_cast<std::ptrdiff_t>(c);
    } else {
      out.predictor_names.push_back(header[c]);
    }
  }
  if (y_col < 0)
    throw ParseError(lineno, "line " + std::to_string(lineno) + ": header has no 'y' column");
  if (out.predictor_names.empty())
    throw ParseError(lineno, "line " + std::to_string(lineno) + ": header has no predictor columns");

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty())
      continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != header.size())
      throw ParseError(lineno, "line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()));
    for (auto f : fields) {
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size() || f.empty())
        throw ParseError(lineno, "line " + std::to_string(lineno) + ": cannot parse '" +
                                   std::string(f) + "' as a number");
      values.push_back(v);
    }
    ++rows;
  }

  const auto n = static_cast<Eigen::Index>(rows);
  const auto cols = static_cast<Eigen::Index>(header.size());
  out.data.X.resize(n, cols - 1);
  out.data.Y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index j = 0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double v = values[static_cast<std::size_t>(i * cols + c)];
      if (c == y_col)
        out.data.Y(i) = v;
      else
        out.data.X(i, j++) = v;
    }
  }
  return out;
}

inline NamedDataset read_csv_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ParseError(0, "cannot open input file '" + path + "'");
  return read_csv(in);
}

inline void write_csv(std::ostream& out, const Dataset& data, std::vector<std::string> names = {})
{
  if (names.empty())
    for (Eigen::Index j = 0; j < data.d(); ++j)
      names.push_back("x" + std::to_string(j + 1));
  for (const auto& name : names)
    out << name << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j)
      out << format_double(data.X(i, j)) << ',';
    out << format_double(data.Y(i)) << '\n';
  }
}

} // namespace samm
