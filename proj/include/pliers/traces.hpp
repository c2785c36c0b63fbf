#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pliers/graph_io.hpp"
#include "pliers/types.hpp"

namespace pliers {

/// Physical contact between two agents at `time`. Symmetric.
struct ContactEvent {
  Seconds time = 0;
  std::string a;
  std::string b;

  bool operator==(const ContactEvent&) const = default;
};

/// Content published by `creator` at `time`.
struct ContentEvent {
  Seconds time = 0;
  std::string creator;
  std::string item;
  std::vector<std::string> tags;

  bool operator==(const ContentEvent&) const = default;
};

inline constexpr std::string_view kContactHeader = "time_s,agent_a,agent_b";
inline constexpr std::string_view kContentHeader = "time_s,agent,item_key,tags";

namespace detail {

inline bool is_valid_key(std::string_view key) {
  return !key.empty() && key.find_first_of(",;\t\r\n") == std::string_view::npos;
}

inline void require_key(std::string_view key, const char* what) {
  if (!is_valid_key(key)) throw InvalidInput(std::string("cannot serialize ") + what + " '" + std::string(key) + "'");
}

/// Iterates data lines of a CSV stream, skipping blanks, `#` comments and an
/// optional header equal to `header`.
template <class F>
void for_each_csv_record(std::istream& in, std::string_view header, F&& f) {
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = strip_cr(line);
    if (view.empty() || view.front() == '#') continue;
    if (first && view == header) {
      first = false;
      continue;
    }
    first = false;
    f(view, line_no);
  }
}

}  // namespace detail

/// Reads `time_s,agent_a,agent_b` records.
inline std::vector<ContactEvent> read_contacts_csv(std::istream& in, const std::string& source = "contacts") {
  std::vector<ContactEvent> out;
  detail::for_each_csv_record(in, kContactHeader, [&](std::string_view line, std::size_t no) {
    auto f = detail::split(line, ',');
    if (f.size() != 3) throw ParseError(source, no, "expected 3 comma-separated fields");
    ContactEvent e;
    if (!detail::parse_int(f[0], e.time) || e.time < 0) throw ParseError(source, no, "bad time");
    if (f[1].empty() || f[2].empty()) throw ParseError(source, no, "empty agent id");
    if (f[1] == f[2]) throw ParseError(source, no, "contact of an agent with itself");
    e.a = f[1];
    e.b = f[2];
    out.push_back(std::move(e));
  });
  return out;
}

/// Reads `time_s,agent,item_key,tags` records, tags `;`-separated.
inline std::vector<ContentEvent> read_contents_csv(std::istream& in, const std::string& source = "contents") {
  std::vector<ContentEvent> out;
  detail::for_each_csv_record(in, kContentHeader, [&](std::string_view line, std::size_t no) {
    auto f = detail::split(line, ',');
    if (f.size() != 4) throw ParseError(source, no, "expected 4 comma-separated fields");
    ContentEvent e;
    if (!detail::parse_int(f[0], e.time) || e.time < 0) throw ParseError(source, no, "bad time");
    if (f[1].empty() || f[2].empty()) throw ParseError(source, no, "empty agent or item key");
    e.creator = f[1];
    e.item = f[2];
    for (auto tag : detail::split(f[3], ';')) {
      if (tag.empty()) throw ParseError(source, no, "empty tag");
      e.tags.emplace_back(tag);
    }
    out.push_back(std::move(e));
  });
  return out;
}

inline void write_contacts_csv(std::ostream& out, const std::vector<ContactEvent>& events) {
  out << kContactHeader << '\n';
  for (const auto& e : events) {
    detail::require_key(e.a, "agent id");
    detail::require_key(e.b, "agent id");
    out << e.time << ',' << e.a << ',' << e.b << '\n';
  }
}

inline void write_contents_csv(std::ostream& out, const std::vector<ContentEvent>& events) {
  out << kContentHeader << '\n';
  for (const auto& e : events) {
    detail::require_key(e.creator, "agent id");
    detail::require_key(e.item, "item key");
    if (e.tags.empty()) throw InvalidInput("cannot serialize content '" + e.item + "' without tags");
    out << e.time << ',' << e.creator << ',' << e.item << ',';
    for (std::size_t t = 0; t < e.tags.size(); ++t) {
      detail::require_key(e.tags[t], "tag");
      out << (t ? ";" : "") << e.tags[t];
    }
    out << '\n';
  }
}

}  // namespace pliers
