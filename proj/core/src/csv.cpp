#include "emview/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "emview/error.hpp"

namespace emview {
namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits on commas outside quotes and outside brackets.
std::vector<Field> split_line(std::string_view line, std::size_t lineno) {
  std::vector<Field> out;
  Field cur;
  int depth = 0;
  bool in_quotes = false;
  std::string raw;
  auto flush = [&] {
    if (cur.quoted) {
      out.push_back(std::move(cur));
    } else {
      out.push_back({std::string(trim(raw)), false});
    }
    cur = Field{};
    raw.clear();
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.text += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur.text += c;
      }
      continue;
    }
    if (c == '"' && trim(raw).empty() && depth == 0) {
      in_quotes = true;
      cur.quoted = true;
      raw.clear();
    } else if (c == '[') {
      ++depth;
      raw += c;
    } else if (c == ']') {
      if (--depth < 0) {
        fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": unbalanced ']'");
      }
      raw += c;
    } else if (c == ',' && depth == 0) {
      flush();
    } else if (!cur.quoted) {
      raw += c;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      fail(ErrorCode::ParseError,
           "line " + std::to_string(lineno) + ": text after closing quote");
    }
  }
  if (in_quotes) fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": unterminated quote");
  if (depth != 0) fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": unbalanced '['");
  flush();
  return out;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

// Splits the inside of a bracketed list at top-level commas.
std::vector<std::string_view> list_items(std::string_view s) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    fail(ErrorCode::ParseError, "expected bracketed list, got '" + std::string(s) + "'");
  }
  s = s.substr(1, s.size() - 2);
  std::vector<std::string_view> items;
  if (trim(s).empty()) return items;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
    if (s[i] == ',' && depth == 0) {
      items.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  items.push_back(trim(s.substr(start)));
  return items;
}

DenseVector parse_vector(std::string_view s) {
  const auto items = list_items(s);
  DenseVector v(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!parse_real(items[i], v[i])) {
      fail(ErrorCode::ParseError, "malformed vector entry '" + std::string(items[i]) + "'");
    }
  }
  return v;
}

DenseMatrix parse_matrix(std::string_view s) {
  const auto rows = list_items(s);
  if (rows.empty()) fail(ErrorCode::ParseError, "empty matrix literal");
  std::vector<DenseVector> parsed;
  for (auto r : rows) parsed.push_back(parse_vector(r));
  DenseMatrix m(parsed.size(), parsed.front().size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (parsed[i].size() != m.cols()) fail(ErrorCode::ParseError, "ragged matrix literal");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = parsed[i][j];
  }
  return m;
}

ValueType guess(const Field& f) {
  if (f.quoted) return ValueType::Text;
  const std::string_view s = f.text;
  if (s.starts_with("[[")) return ValueType::Mat;
  if (s.starts_with("[")) return ValueType::Vec;
  std::int64_t i = 0;
  if (parse_int(s, i)) return ValueType::Int;
  double d = 0;
  if (parse_real(s, d)) return ValueType::Real;
  return ValueType::Text;
}

ValueType merge(ValueType a, ValueType b) {
  if (a == b) return a;
  if ((a == ValueType::Int && b == ValueType::Real) || (a == ValueType::Real && b == ValueType::Int)) {
    return ValueType::Real;
  }
  return ValueType::Text;
}

bool needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  if (s.find_first_of(",\"\n\r[") != std::string::npos) return true;
  if (s.front() == ' ' || s.back() == ' ') return true;
  double d = 0;
  return parse_real(s, d);
}

}  // namespace

Value parse_cell(std::string_view text, const CellType& type) {
  const std::string_view s = trim(text);
  switch (type.type) {
    case ValueType::Int: {
      std::int64_t i = 0;
      if (!parse_int(s, i)) fail(ErrorCode::ParseError, "malformed integer '" + std::string(s) + "'");
      return Value(i);
    }
    case ValueType::Real: {
      double d = 0;
      if (!parse_real(s, d)) fail(ErrorCode::ParseError, "malformed number '" + std::string(s) + "'");
      return Value(d);
    }
    case ValueType::Text:
      return Value(std::string(text));
    case ValueType::Vec: {
      DenseVector v = parse_vector(s);
      if (type.rows != 0 && v.size() != type.rows) {
        fail(ErrorCode::ParseError, "vector of length " + std::to_string(v.size()) +
                                        ", expected " + std::to_string(type.rows));
      }
      return Value(std::move(v));
    }
    case ValueType::Mat: {
      DenseMatrix m = parse_matrix(s);
      if (type.rows != 0 && (m.rows() != type.rows || m.cols() != type.cols)) {
        fail(ErrorCode::ParseError, "matrix shape mismatch, expected " + to_string(type));
      }
      return Value(std::move(m));
    }
  }
  return Value();
}

Relation read_csv(std::istream& in, const std::optional<Schema>& expected, std::string_view source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> names;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    for (auto& f : split_line(line, lineno)) {
      std::string n = f.text;
      std::transform(n.begin(), n.end(), n.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      names.push_back(std::move(n));
    }
    break;
  }
  if (names.empty()) fail(ErrorCode::ParseError, std::string(source) + ": missing header row");
  if (expected && expected->size() != names.size()) {
    fail(ErrorCode::SchemaMismatch, std::string(source) + ": header has " +
                                        std::to_string(names.size()) + " columns, expected " +
                                        std::to_string(expected->size()));
  }

  std::vector<std::vector<Field>> fields;
  std::vector<std::size_t> lines;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto row = split_line(line, lineno);
    if (row.size() != names.size()) {
      fail(ErrorCode::ParseError, std::string(source) + ": row " +
                                      std::to_string(fields.size() + 1) + " (line " +
                                      std::to_string(lineno) + ") has " +
                                      std::to_string(row.size()) + " fields, expected " +
                                      std::to_string(names.size()));
    }
    fields.push_back(std::move(row));
    lines.push_back(lineno);
  }

  std::vector<Attribute> attrs;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (expected) {
      attrs.push_back({names[c], (*expected)[c].type});
      continue;
    }
    CellType t = CellType::real();
    if (!fields.empty()) {
      ValueType vt = guess(fields[0][c]);
      for (std::size_t r = 1; r < fields.size(); ++r) vt = merge(vt, guess(fields[r][c]));
      t.type = vt;
      // Shapes come from the first row; later rows are checked on parse.
      try {
        if (vt == ValueType::Vec) t = CellType::vector(parse_vector(fields[0][c].text).size());
        if (vt == ValueType::Mat) {
          const DenseMatrix m = parse_matrix(fields[0][c].text);
          t = CellType::matrix(m.rows(), m.cols());
        }
      } catch (const Error& e) {
        fail(ErrorCode::ParseError, std::string(source) + ": row 1 (line " +
                                        std::to_string(lines[0]) + "): " + e.what());
      }
    }
    attrs.push_back({names[c], t});
  }
  Schema schema(std::move(attrs));

  std::vector<Row> rows;
  rows.reserve(fields.size());
  for (std::size_t r = 0; r < fields.size(); ++r) {
    Row row;
    row.reserve(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
      try {
        row.push_back(parse_cell(fields[r][c].text, schema[c].type));
      } catch (const Error& e) {
        fail(ErrorCode::ParseError, std::string(source) + ": row " + std::to_string(r + 1) +
                                        " (line " + std::to_string(lines[r]) + "), column " +
                                        names[c] + ": " + e.what());
      }
    }
    rows.push_back(std::move(row));
  }
  return Relation(std::move(schema), std::move(rows));
}

Relation read_csv_file(const std::filesystem::path& path, const std::optional<Schema>& expected) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return read_csv(in, expected, path.string());
}

void write_csv(std::ostream& out, const Relation& rel) {
  const auto& schema = rel.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c) out << ',';
    out << schema[c].name;
  }
  out << '\n';
  for (const Row& row : rel.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (row[c].is_text() && needs_quotes(row[c].as_text())) {
        out << '"';
        for (char ch : row[c].as_text()) {
          if (ch == '"') out << '"';
          out << ch;
        }
        out << '"';
      } else {
        out << format_value(row[c]);
      }
    }
    out << '\n';
  }
}

void write_csv_file(const std::filesystem::path& path, const Relation& rel) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  write_csv(out, rel);
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace emview
