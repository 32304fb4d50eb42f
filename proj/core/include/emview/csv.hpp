#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "emview/relation.hpp"

namespace emview {

/// Reads a relation from CSV. The header row names the attributes (lower-cased).
/// Column types are inferred from the cells unless `expected` is given: all
/// integers → Int, numbers → Real, "[..]" → Vec, "[[..],..]" → Mat, anything
/// else or any quoted cell → Text. A header-only file yields an empty relation
/// with Real columns. Malformed input throws ParseError naming the row.
Relation read_csv(std::istream& in, const std::optional<Schema>& expected = std::nullopt,
                  std::string_view source = "<input>");
Relation read_csv_file(const std::filesystem::path& path,
                       const std::optional<Schema>& expected = std::nullopt);

void write_csv(std::ostream& out, const Relation& rel);
void write_csv_file(const std::filesystem::path& path, const Relation& rel);

/// Parses one cell as the given type; throws ParseError on malformed text.
Value parse_cell(std::string_view text, const CellType& type);

}  // namespace emview
