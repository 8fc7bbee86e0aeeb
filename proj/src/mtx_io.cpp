#include "spchar/mtx_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace spchar {

MatrixMarketError::MatrixMarketError(std::size_t line, const std::string& detail, const std::string& source)
    : std::runtime_error((source.empty() ? std::string("line ") : source + ":") + std::to_string(line) + ": " + detail),
      line_(line),
      detail_(detail) {}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

enum class Field { Real, Integer, Pattern };

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_int(std::string_view tok, T& out) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

bool parse_real(std::string_view tok, double& out) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

}  // namespace

CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw MatrixMarketError(1, "empty input, expected %%MatrixMarket banner");
  ++lineno;
  auto head = tokens(line);
  if (head.size() != 5 || lower(std::string(head[0])) != "%%matrixmarket") {
    throw MatrixMarketError(lineno, "malformed header: expected '%%MatrixMarket matrix coordinate <field> <symmetry>'");
  }
  if (lower(std::string(head[1])) != "matrix") throw MatrixMarketError(lineno, "unsupported object '" + std::string(head[1]) + "'");
  if (lower(std::string(head[2])) != "coordinate") {
    throw MatrixMarketError(lineno, "unsupported format '" + std::string(head[2]) + "' (only coordinate)");
  }
  Field field;
  const std::string f = lower(std::string(head[3]));
  if (f == "real" || f == "double") field = Field::Real;
  else if (f == "integer") field = Field::Integer;
  else if (f == "pattern") field = Field::Pattern;
  else throw MatrixMarketError(lineno, "unsupported field '" + f + "' (real, integer or pattern)");

  const std::string sym = lower(std::string(head[4]));
  bool symmetric = false;
  if (sym == "symmetric") symmetric = true;
  else if (sym != "general") throw MatrixMarketError(lineno, "unsupported symmetry '" + sym + "' (general or symmetric)");

  // Size line, skipping comments and blank lines.
  std::uint64_t rows = 0, cols = 0, entries = 0;
  for (;;) {
    if (!std::getline(in, line)) throw MatrixMarketError(lineno + 1, "missing size line");
    ++lineno;
    if (blank(line) || line[line.find_first_not_of(" \t")] == '%') continue;
    auto t = tokens(line);
    if (t.size() != 3 || !parse_int(t[0], rows) || !parse_int(t[1], cols) || !parse_int(t[2], entries)) {
      throw MatrixMarketError(lineno, "malformed size line, expected '<rows> <cols> <entries>'");
    }
    break;
  }
  if (rows > 0xffffffffULL || cols > 0xffffffffULL) throw MatrixMarketError(lineno, "dimensions exceed 32-bit index range");
  if (symmetric && rows != cols) throw MatrixMarketError(lineno, "symmetric matrix must be square");

  std::vector<Triplet> trips;
  trips.reserve(symmetric ? 2 * entries : entries);
  std::uint64_t seen = 0;
  while (seen < entries) {
    if (!std::getline(in, line)) {
      throw MatrixMarketError(lineno + 1, "premature end of data: expected " + std::to_string(entries) +
                                              " entries, found " + std::to_string(seen));
    }
    ++lineno;
    if (blank(line)) continue;
    if (line[line.find_first_not_of(" \t")] == '%') continue;
    auto t = tokens(line);
    const std::size_t want = field == Field::Pattern ? 2 : 3;
    if (t.size() < want) throw MatrixMarketError(lineno, "expected " + std::to_string(want) + " fields");
    std::uint64_t r = 0, c = 0;
    if (!parse_int(t[0], r) || !parse_int(t[1], c)) throw MatrixMarketError(lineno, "non-numeric coordinate");
    if (r < 1 || r > rows || c < 1 || c > cols) {
      throw MatrixMarketError(lineno, "coordinate (" + std::string(t[0]) + ", " + std::string(t[1]) + ") out of range");
    }
    double v = 1.0;
    if (field == Field::Real) {
      if (!parse_real(t[2], v)) throw MatrixMarketError(lineno, "non-numeric value '" + std::string(t[2]) + "'");
    } else if (field == Field::Integer) {
      long long iv = 0;
      if (!parse_int(t[2], iv)) throw MatrixMarketError(lineno, "non-integer value '" + std::string(t[2]) + "'");
      v = static_cast<double>(iv);
    }
    const auto ri = static_cast<index_t>(r - 1), ci = static_cast<index_t>(c - 1);
    trips.push_back({ri, ci, static_cast<value_t>(v)});
    if (symmetric && ri != ci) trips.push_back({ci, ri, static_cast<value_t>(v)});
    ++seen;
  }
  return from_triplets(static_cast<index_t>(rows), static_cast<index_t>(cols), std::move(trips));
}

CsrMatrix read_matrix_market_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return read_matrix_market(in);
  } catch (const MatrixMarketError& e) {
    throw MatrixMarketError(e.line(), e.detail(), path.string());
  }
}

namespace {

std::string format_value(value_t v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  if (s.find_first_of(".eE") == std::string::npos && s.find_first_of("ni") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

void write_matrix_market(const CsrMatrix& m, std::ostream& out, const std::string& comment) {
  require_valid(m);
  out << "%%MatrixMarket matrix coordinate real general\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string l;
    while (std::getline(lines, l)) out << "% " << l << '\n';
  }
  out << m.rows << ' ' << m.cols << ' ' << m.nnz() << '\n';
  for (index_t i = 0; i < m.rows; ++i) {
    for (index_t k = m.row_ptrs[i]; k < m.row_ptrs[i + 1]; ++k) {
      out << (i + 1) << ' ' << (m.col_idxs[k] + 1) << ' ' << format_value(m.nnz_vals[k]) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write_matrix_market: output stream failure");
}

void write_matrix_market_file(const CsrMatrix& m, const std::filesystem::path& path, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_matrix_market(m, out, comment);
  out.flush();
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

}  // namespace spchar
