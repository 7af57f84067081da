#include "qclab/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace qclab {

namespace detail {

std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    ++number;
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
    if (!raw.empty() && raw.front() != '#') lines.push_back({number, std::string(raw)});
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return lines;
}

void parse_fail(int line, const std::string& message) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message);
}

std::vector<std::pair<std::string, std::string>> header_fields(const Line& line) {
  std::vector<std::pair<std::string, std::string>> fields;
  std::istringstream stream(line.text);
  std::string token;
  while (stream >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) parse_fail(line.number, "expected key=value, got '" + token + "'");
    fields.emplace_back(token.substr(0, eq), token.substr(eq + 1));
  }
  return fields;
}

int parse_int(const Line& line, const std::string& value) {
  if (value.empty() || value.size() > 9) parse_fail(line.number, "bad integer '" + value + "'");
  for (char c : value) {
    if (!std::isdigit(static_cast<unsigned char>(c))) parse_fail(line.number, "bad integer '" + value + "'");
  }
  return std::stoi(value);
}

}  // namespace detail

namespace {

using detail::Line;
using detail::parse_fail;
using detail::parse_int;

int expect_arity_header(const std::vector<Line>& lines, const char* what) {
  if (lines.empty()) fail(ErrorCode::ParseError, std::string("empty ") + what + " file");
  const auto fields = detail::header_fields(lines[0]);
  if (fields.size() != 1 || fields[0].first != "arity") parse_fail(lines[0].number, "expected 'arity=<k>'");
  return parse_int(lines[0], fields[0].second);
}

// Re-raise construction errors with the header line number attached.
template <class F>
auto with_line(int line, F&& build) {
  try {
    return build();
  } catch (const QclabError& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    parse_fail(line, e.message());
  }
}

}  // namespace

TruthTable parse_truth_table(std::string_view text) {
  const auto lines = detail::content_lines(text);
  const int arity = expect_arity_header(lines, "truth table");
  if (arity < 1 || arity > caps().truth_table_arity) parse_fail(lines[0].number, "arity out of range");
  if (lines.size() != 2) {
    parse_fail(lines.size() < 2 ? lines[0].number : lines[2].number, "expected exactly one line of outputs");
  }
  const Line& body = lines[1];
  if (body.text.size() != cube_size(arity)) {
    parse_fail(body.number, "expected " + std::to_string(cube_size(arity)) + " output characters, got " +
                                std::to_string(body.text.size()));
  }
  std::vector<std::uint8_t> outputs(body.text.size());
  for (std::size_t i = 0; i < body.text.size(); ++i) {
    const char c = body.text[i];
    if (c != '0' && c != '1') parse_fail(body.number, "output characters must be 0 or 1");
    outputs[i] = c == '1';
  }
  return with_line(lines[0].number, [&] { return TruthTable(arity, std::move(outputs)); });
}

Relation parse_relation(std::string_view text) {
  const auto lines = detail::content_lines(text);
  if (lines.empty()) fail(ErrorCode::ParseError, "empty relation file");
  int arity = -1, alphabet = -1;
  for (const auto& [key, value] : detail::header_fields(lines[0])) {
    if (key == "arity") arity = parse_int(lines[0], value);
    else if (key == "alphabet") alphabet = parse_int(lines[0], value);
    else parse_fail(lines[0].number, "unknown header key '" + key + "'");
  }
  if (arity < 1 || alphabet < 1) parse_fail(lines[0].number, "expected 'arity=<n> alphabet=<R>'");
  if (arity > caps().truth_table_arity) parse_fail(lines[0].number, "arity out of range");
  if (alphabet > caps().alphabet) parse_fail(lines[0].number, "alphabet too large");
  std::vector<Relation::LabelSet> accepted(cube_size(arity), 0);
  std::vector<bool> seen(accepted.size(), false);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    const auto colon = line.text.find(':');
    if (colon == std::string::npos) parse_fail(line.number, "expected '<bitstring>: labels'");
    std::string bits = line.text.substr(0, colon);
    while (!bits.empty() && std::isspace(static_cast<unsigned char>(bits.back()))) bits.pop_back();
    if (bits.size() != static_cast<std::size_t>(arity)) parse_fail(line.number, "bitstring length differs from arity");
    Point x = 0;
    try {
      x = bits_to_point(bits);
    } catch (const QclabError&) {
      parse_fail(line.number, "bad bitstring '" + bits + "'");
    }
    if (seen[x]) parse_fail(line.number, "duplicate input " + bits);
    seen[x] = true;
    std::istringstream labels(line.text.substr(colon + 1));
    std::string token;
    while (std::getline(labels, token, ',')) {
      std::size_t a = token.find_first_not_of(" \t");
      std::size_t b = token.find_last_not_of(" \t");
      if (a == std::string::npos) continue;
      const int r = parse_int(line, token.substr(a, b - a + 1));
      if (r >= alphabet) parse_fail(line.number, "label " + std::to_string(r) + " outside alphabet");
      accepted[x] |= Relation::LabelSet{1} << r;
    }
    if (accepted[x] == 0) parse_fail(line.number, "input " + bits + " accepts no label");
  }
  for (std::size_t x = 0; x < seen.size(); ++x) {
    if (!seen[x]) {
      parse_fail(lines.back().number, "missing input " + point_to_bits(static_cast<Point>(x), arity));
    }
  }
  return with_line(lines[0].number, [&] { return Relation(arity, alphabet, std::move(accepted)); });
}

Dist parse_dist(std::string_view text) {
  const auto lines = detail::content_lines(text);
  const int arity = expect_arity_header(lines, "distribution");
  if (arity > caps().structured_arity) parse_fail(lines[0].number, "arity out of range");
  const std::uint64_t size = cube_size(arity);
  if (lines.size() - 1 != size) {
    parse_fail(lines.back().number,
               "expected " + std::to_string(size) + " probabilities, got " + std::to_string(lines.size() - 1));
  }
  std::vector<Rational> probs;
  probs.reserve(size);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    try {
      probs.push_back(parse_rational(lines[i].text));
    } catch (const QclabError&) {
      parse_fail(lines[i].number, "bad rational '" + lines[i].text + "'");
    }
  }
  return with_line(lines[0].number, [&] { return Dist(arity, std::move(probs)); });
}

std::string format_truth_table(const TruthTable& g) {
  std::string out = "arity=" + std::to_string(g.arity()) + "\n";
  for (auto bit : g.outputs()) out += bit ? '1' : '0';
  out += '\n';
  return out;
}

std::string format_relation(const Relation& f) {
  std::string out = "arity=" + std::to_string(f.arity()) + " alphabet=" + std::to_string(f.alphabet()) + "\n";
  for (Point x = 0; x < cube_size(f.arity()); ++x) {
    out += point_to_bits(x, f.arity()) + ":";
    bool first = true;
    for (int r = 0; r < f.alphabet(); ++r) {
      if (!f.accepts(x, r)) continue;
      out += first ? " " : ",";
      out += std::to_string(r);
      first = false;
    }
    out += '\n';
  }
  return out;
}

std::string format_dist(const Dist& mu) {
  std::string out = "arity=" + std::to_string(mu.arity()) + "\n";
  for (const auto& p : mu.probs()) out += to_fraction_string(p) + "\n";
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << contents;
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

namespace {

template <class F>
auto load_with_path(const std::filesystem::path& path, F&& parse) {
  const std::string text = read_file(path);
  try {
    return parse(text);
  } catch (const QclabError& e) {
    throw QclabError(e.code(), path.string() + ": " + e.message());
  }
}

}  // namespace

TruthTable load_truth_table(const std::filesystem::path& path) {
  return load_with_path(path, [](const std::string& t) { return parse_truth_table(t); });
}

Relation load_relation(const std::filesystem::path& path) {
  return load_with_path(path, [](const std::string& t) { return parse_relation(t); });
}

Dist load_dist(const std::filesystem::path& path) {
  return load_with_path(path, [](const std::string& t) { return parse_dist(t); });
}

Relation load_relation_or_function(const std::filesystem::path& path) {
  return load_with_path(path, [](const std::string& t) {
    const auto lines = detail::content_lines(t);
    if (!lines.empty() && lines[0].text.find("alphabet=") != std::string::npos) return parse_relation(t);
    return Relation::from_function(parse_truth_table(t));
  });
}

}  // namespace qclab
