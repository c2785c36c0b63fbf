#include "pliers/graph_io.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "pliers/synthetic.hpp"

using namespace pliers;

namespace {

FolksonomyGraph parse(const std::string& text) {
  std::istringstream in(text);
  return read_graph_tsv(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(GraphTsv, RoundTripKeepsTimestamps) {
  FolksonomyGraph g;
  g.add_content("u1", "i1", {"t1", "t2"}, 60);
  g.add_content("u2", "i2", {"t2"}, 120);
  g.add_adoption("u2", "i1", 300);
  std::stringstream s;
  write_graph_tsv(s, g);
  auto back = read_graph_tsv(s);
  EXPECT_EQ(back, g);
  EXPECT_EQ(back.edge_time(*back.find_user("u2"), *back.find_item("i1")), 300);
  EXPECT_EQ(back.created_at(*back.find_item("i1")), 60);
}

TEST(GraphTsv, RoundTripGeneratedFolksonomy) {
  FolksonomyGenParams p;
  p.n_users = 60;
  p.n_items = 90;
  p.n_tags = 40;
  auto g = generate_folksonomy(p);
  std::stringstream s;
  write_graph_tsv(s, g);
  const std::string first = s.str();
  auto back = read_graph_tsv(s);
  EXPECT_EQ(back, g);
  std::ostringstream again;
  write_graph_tsv(again, back);
  EXPECT_EQ(again.str(), first);
}

TEST(GraphTsv, CommentsAndBlankLinesIgnored) {
  auto g = parse("# snapshot\n\nUI\tu\ti\t0\r\nIT\ti\tt\t0\n");
  EXPECT_EQ(g.user_item_edge_count(), 1u);
  EXPECT_EQ(g.item_tag_edge_count(), 1u);
}

TEST(GraphTsv, RejectsMalformedAndDanglingRecords) {
  EXPECT_EQ(error_line("UI\tu\ti\t0\nIT\ti\tt\n"), 2u);
  EXPECT_EQ(error_line("UI\tu\ti\tnoon\nIT\ti\tt\t0\n"), 1u);
  EXPECT_EQ(error_line("XX\tu\ti\t0\n"), 1u);
  EXPECT_EQ(error_line("UI\t\ti\t0\n"), 1u);
  // Item without tags, then item without users.
  EXPECT_EQ(error_line("IT\ti\tt\t0\nUI\tu\ti\t0\nUI\tu\tj\t0\n"), 3u);
  EXPECT_EQ(error_line("UI\tu\ti\t0\nIT\ti\tt\t0\nIT\tk\tt\t0\n"), 3u);
}
