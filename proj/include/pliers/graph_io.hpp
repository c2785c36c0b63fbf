#pragma once

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pliers/folksonomy.hpp"

namespace pliers {

/// Malformed trace, graph or config input. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline bool parse_int(std::string_view text, std::int64_t& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace detail

/// Writes the graph snapshot TSV: `UI` records first, then `IT` records, both
/// sorted by key so equal graphs serialize identically.
inline void write_graph_tsv(std::ostream& out, const FolksonomyGraph& g) {
  std::vector<std::tuple<std::string, std::string, Seconds>> ui, it;
  for (std::uint32_t u = 0; u < g.user_count(); ++u) {
    for (ItemHandle i : g.items_of(UserHandle{u})) {
      ui.emplace_back(g.key(UserHandle{u}), g.key(i), *g.edge_time(UserHandle{u}, i));
    }
  }
  for (std::uint32_t i = 0; i < g.item_count(); ++i) {
    for (TagHandle t : g.tags_of(ItemHandle{i})) {
      it.emplace_back(g.key(ItemHandle{i}), g.key(t), *g.edge_time(ItemHandle{i}, t));
    }
  }
  std::sort(ui.begin(), ui.end());
  std::sort(it.begin(), it.end());
  for (const auto& [a, b, t] : ui) out << "UI\t" << a << '\t' << b << '\t' << t << '\n';
  for (const auto& [a, b, t] : it) out << "IT\t" << a << '\t' << b << '\t' << t << '\n';
}

/// Parses a graph snapshot. Item creation time is the earliest time among its
/// records. Every item needs at least one `UI` and one `IT` record; anything
/// else is a dangling record and is rejected.
inline FolksonomyGraph read_graph_tsv(std::istream& in, const std::string& source = "graph") {
  struct Record {
    std::string a, b;
    Seconds time;
    std::size_t line;
  };
  std::vector<Record> ui, it;
  std::map<std::string, Seconds, std::less<>> first_seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::strip_cr(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = detail::split(view, '\t');
    if (fields.size() != 4) throw ParseError(source, line_no, "expected 4 tab-separated fields");
    if (fields[1].empty() || fields[2].empty()) throw ParseError(source, line_no, "empty key");
    std::int64_t time = 0;
    if (!detail::parse_int(fields[3], time)) throw ParseError(source, line_no, "bad time");
    const std::string_view item = fields[0] == "UI" ? fields[2] : fields[1];
    if (fields[0] == "UI") {
      ui.push_back({std::string(fields[1]), std::string(fields[2]), time, line_no});
    } else if (fields[0] == "IT") {
      it.push_back({std::string(fields[1]), std::string(fields[2]), time, line_no});
    } else {
      throw ParseError(source, line_no, "unknown record type '" + std::string(fields[0]) + "'");
    }
    auto [pos, fresh] = first_seen.try_emplace(std::string(item), time);
    if (!fresh) pos->second = std::min(pos->second, time);
  }
  std::set<std::string, std::less<>> with_user, with_tag;
  for (const auto& r : ui) with_user.insert(r.b);
  for (const auto& r : it) with_tag.insert(r.a);
  for (const auto& r : ui) {
    if (!with_tag.contains(r.b)) throw ParseError(source, r.line, "item '" + r.b + "' has no tags");
  }
  for (const auto& r : it) {
    if (!with_user.contains(r.a)) throw ParseError(source, r.line, "item '" + r.a + "' has no user");
  }

  FolksonomyGraph g;
  for (const auto& [item, created] : first_seen) g.add_item(item, created);
  for (const auto& r : ui) g.add_adoption(r.a, r.b, r.time);
  for (const auto& r : it) g.add_item_tag(r.a, r.b, r.time);
  return g;
}

}  // namespace pliers
