#pragma once

// Text file formats.
//
//   truth table:   "arity=<m>" then one line of 2^m '0'/'1' characters in index order
//   relation:      "arity=<n> alphabet=<R>" then one line "<bitstring>: r1,r2,..." per input
//   distribution:  "arity=<k>" then 2^k lines "<numerator>/<denominator>"
//
// Blank lines and lines starting with '#' are ignored. Parse errors carry the
// 1-based line number.

#include <filesystem>
#include <string>
#include <string_view>

#include "qclab/core.hpp"

namespace qclab {

TruthTable parse_truth_table(std::string_view text);
Relation parse_relation(std::string_view text);
Dist parse_dist(std::string_view text);

std::string format_truth_table(const TruthTable& g);
std::string format_relation(const Relation& f);
std::string format_dist(const Dist& mu);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

TruthTable load_truth_table(const std::filesystem::path& path);
Relation load_relation(const std::filesystem::path& path);
Dist load_dist(const std::filesystem::path& path);

/// Accepts either a relation file or a truth-table file (promoted to its graph).
Relation load_relation_or_function(const std::filesystem::path& path);

namespace detail {

struct Line {
  int number;
  std::string text;
};

/// Non-empty, non-comment lines with surrounding whitespace trimmed.
std::vector<Line> content_lines(std::string_view text);

/// Parses "key=value" tokens of a header line into (key, value) pairs.
std::vector<std::pair<std::string, std::string>> header_fields(const Line& line);

[[noreturn]] void parse_fail(int line, const std::string& message);

int parse_int(const Line& line, const std::string& value);

}  // namespace detail

}  // namespace qclab
