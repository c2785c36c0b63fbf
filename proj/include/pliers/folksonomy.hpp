#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "pliers/types.hpp"

namespace pliers {

namespace detail {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

/// Process-wide string interner. Every distinct key gets one 32-bit symbol
/// for the life of the process, so graphs can exchange nodes by symbol
/// without rehashing strings. Names have stable addresses.
class SymbolTable {
 public:
  static SymbolTable& instance() {
    static SymbolTable table;
    return table;
  }

  std::pair<std::uint32_t, const std::string*> intern(std::string_view name) {
    std::lock_guard lock(mutex_);
    auto it = index_.find(name);
    if (it != index_.end()) return {it->second, &names_[it->second]};
    auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return {id, &names_.back()};
  }

  std::optional<std::uint32_t> find(std::string_view name) const {
    std::lock_guard lock(mutex_);
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  mutable std::mutex mutex_;
  std::deque<std::string> names_;
  std::unordered_map<std::string_view, std::uint32_t> index_;
};

/// Per-graph dense numbering of the symbols of one node kind.
class KeyTable {
 public:
  std::optional<std::uint32_t> find(std::string_view key) const {
    auto sym = SymbolTable::instance().find(key);
    if (!sym) return std::nullopt;
    return find_symbol(*sym);
  }

  std::optional<std::uint32_t> find_symbol(std::uint32_t sym) const {
    auto it = local_.find(sym);
    if (it == local_.end()) return std::nullopt;
    return it->second;
  }

  /// Returns the index and whether the key was newly inserted.
  std::pair<std::uint32_t, bool> intern(std::string_view key) {
    auto [sym, name] = SymbolTable::instance().intern(key);
    return intern_symbol(sym, name);
  }

  std::pair<std::uint32_t, bool> intern_symbol(std::uint32_t sym, const std::string* name) {
    auto [it, fresh] = local_.try_emplace(sym, static_cast<std::uint32_t>(symbols_.size()));
    if (fresh) {
      symbols_.push_back(sym);
      names_.push_back(name);
    }
    return {it->second, fresh};
  }

  const std::string& key(std::uint32_t id) const { return *names_[id]; }
  const std::string* name_ptr(std::uint32_t id) const { return names_[id]; }
  std::uint32_t symbol(std::uint32_t id) const { return symbols_[id]; }
  std::size_t size() const { return symbols_.size(); }

 private:
  std::vector<std::uint32_t> symbols_;
  std::vector<const std::string*> names_;
  std::unordered_map<std::uint32_t, std::uint32_t> local_;
};

/// Position of `value` in a sorted adjacency vector, if present.
template <class H>
std::optional<std::size_t> sorted_find(const std::vector<H>& adj, H value) {
  auto it = std::lower_bound(adj.begin(), adj.end(), value);
  if (it == adj.end() || *it != value) return std::nullopt;
  return static_cast<std::size_t>(it - adj.begin());
}

/// Inserts into a sorted adjacency vector; returns the position.
template <class H>
std::size_t sorted_insert(std::vector<H>& adj, H value) {
  auto it = std::lower_bound(adj.begin(), adj.end(), value);
  auto pos = static_cast<std::size_t>(it - adj.begin());
  adj.insert(it, value);
  return pos;
}

template <class H>
void sorted_erase(std::vector<H>& adj, H value) {
  auto it = std::lower_bound(adj.begin(), adj.end(), value);
  if (it != adj.end() && *it == value) adj.erase(it);
}

}  // namespace detail

/// One record of a flattened graph: a typed, key-addressed edge. Flattened
/// graphs are sorted vectors of these, so set algebra is plain merging.
struct FlatEdge {
  EntityKind from_kind;
  std::string from;
  EntityKind to_kind;
  std::string to;

  auto operator<=>(const FlatEdge&) const = default;
};

using FlatEdgeList = std::vector<FlatEdge>;

/// Timestamped tripartite user-item-tag graph.
///
/// Nodes are interned per kind; adjacency lists are kept sorted by handle so
/// intersections are linear merges. Every edge carries the time it was first
/// observed and every item its creation time; merging keeps the earlier time.
/// The user-tag relation is derived on demand and never stored.
///
/// Single writer: mutation needs exclusive access, const members may be called
/// concurrently on an unmodified instance.
class FolksonomyGraph {
 public:
  // ---- mutation -----------------------------------------------------------

  /// Records that `creator` published `item` labeled with `tags` at `time`.
  /// Re-announcing existing content is idempotent; timestamps keep the minimum.
  template <class TagRange>
  void add_content(std::string_view creator, std::string_view item, const TagRange& tags,
                   Seconds time) {
    if (std::begin(tags) == std::end(tags)) {
      throw InvalidInput("add_content: item '" + std::string(item) + "' has no tags");
    }
    ItemHandle i = ensure_item(item, time);
    link(ensure_user(creator), i, time);
    for (const auto& tag : tags) link(i, ensure_tag(tag), time);
  }

  void add_content(std::string_view creator, std::string_view item,
                   std::initializer_list<std::string_view> tags, Seconds time) {
    add_content<std::initializer_list<std::string_view>>(creator, item, tags, time);
  }

  /// Adds a user-item edge for an item that already exists (a download).
  void add_adoption(std::string_view user, std::string_view item, Seconds time) {
    auto i = find_item(item);
    if (!i) throw InvalidInput("add_adoption: unknown item '" + std::string(item) + "'");
    link(ensure_user(user), *i, std::max(time, created_at(*i)));
  }

  // Low-level builders used by loaders. The item must be registered with
  // add_item before edges reference it.
  ItemHandle add_item(std::string_view item, Seconds created) { return ensure_item(item, created); }

  void add_item_tag(std::string_view item, std::string_view tag, Seconds time) {
    auto i = find_item(item);
    if (!i) throw InvalidInput("add_item_tag: unknown item '" + std::string(item) + "'");
    link(*i, ensure_tag(tag), std::max(time, created_at(*i)));
  }

  /// Component-wise union with `src`; conflicting timestamps keep the earlier
  /// one. Returns the handles (in this graph) of items that were not known
  /// before the merge, in `src` handle order.
  std::vector<ItemHandle> merge(const FolksonomyGraph& src) {
    std::vector<ItemHandle> discovered;
    std::vector<ItemHandle> item_map(src.item_count());
    for (std::uint32_t i = 0; i < src.item_count(); ++i) {
      const ItemHandle s{i};
      auto [id, fresh] = items_.intern_symbol(src.items_.symbol(i), src.items_.name_ptr(i));
      if (fresh) {
        grow_item();
        item_created_.back() = src.created_at(s);
        discovered.push_back(ItemHandle{id});
      } else {
        item_created_[id] = std::min(item_created_[id], src.created_at(s));
      }
      item_map[i] = ItemHandle{id};
    }
    std::vector<UserHandle> user_map(src.user_count());
    for (std::uint32_t u = 0; u < src.user_count(); ++u) {
      user_map[u] = import_user(src, UserHandle{u});
    }
    std::vector<TagHandle> tag_map(src.tag_count());
    for (std::uint32_t t = 0; t < src.tag_count(); ++t) {
      tag_map[t] = import_tag(src, TagHandle{t});
    }
    for (std::uint32_t u = 0; u < src.user_count(); ++u) {
      for (ItemHandle i : src.items_of(UserHandle{u})) {
        link(user_map[u], item_map[i.value], *src.edge_time(UserHandle{u}, i));
      }
    }
    for (std::uint32_t i = 0; i < src.item_count(); ++i) {
      for (TagHandle t : src.tags_of(ItemHandle{i})) {
        link(item_map[i], tag_map[t.value], *src.edge_time(ItemHandle{i}, t));
      }
    }
    return discovered;
  }

  /// Removes one user-item edge. Nodes are kept even if they become isolated.
  bool remove_adoption(UserHandle u, ItemHandle i) {
    auto pos = detail::sorted_find(user_items_[u.value], i);
    if (!pos) return false;
    user_items_[u.value].erase(user_items_[u.value].begin() + static_cast<std::ptrdiff_t>(*pos));
    user_item_times_[u.value].erase(user_item_times_[u.value].begin() + static_cast<std::ptrdiff_t>(*pos));
    detail::sorted_erase(item_users_[i.value], u);
    --user_item_edges_;
    return true;
  }

  // ---- derived graphs -----------------------------------------------------

  /// Copy restricted to items created at or after `now - window`, with their
  /// incident edges. Users and tags without a surviving edge are dropped.
  FolksonomyGraph prune_older_than(Seconds now, Seconds window) const {
    if (window <= 0) throw InvalidInput("prune_older_than: window must be positive");
    const Seconds cutoff = now - window;
    FolksonomyGraph out;
    for (std::uint32_t i = 0; i < item_count(); ++i) {
      const ItemHandle src_item{i};
      if (item_created_[i] < cutoff) continue;
      if (users_of(src_item).empty() && tags_of(src_item).empty()) continue;
      ItemHandle dst_item{out.items_.intern_symbol(items_.symbol(i), items_.name_ptr(i)).first};
      out.grow_item();
      out.item_created_.back() = item_created_[i];
      for (UserHandle u : users_of(src_item)) {
        out.link(out.import_user(*this, u), dst_item, *edge_time(u, src_item));
      }
      for (TagHandle t : tags_of(src_item)) {
        out.link(dst_item, out.import_tag(*this, t), *edge_time(src_item, t));
      }
    }
    return out;
  }

  /// Sorted list of typed edges; size equals |E| + |F|.
  FlatEdgeList flatten() const {
    FlatEdgeList out;
    out.reserve(user_item_edge_count() + item_tag_edge_count());
    for (std::uint32_t u = 0; u < user_count(); ++u) {
      for (ItemHandle i : items_of(UserHandle{u})) {
        out.push_back({EntityKind::User, key(UserHandle{u}), EntityKind::Item, key(i)});
      }
    }
    for (std::uint32_t i = 0; i < item_count(); ++i) {
      for (TagHandle t : tags_of(ItemHandle{i})) {
        out.push_back({EntityKind::Item, key(ItemHandle{i}), EntityKind::Tag, key(t)});
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // ---- lookup -------------------------------------------------------------

  std::optional<UserHandle> find_user(std::string_view k) const {
    if (auto id = users_.find(k)) return UserHandle{*id};
    return std::nullopt;
  }
  std::optional<ItemHandle> find_item(std::string_view k) const {
    if (auto id = items_.find(k)) return ItemHandle{*id};
    return std::nullopt;
  }
  std::optional<TagHandle> find_tag(std::string_view k) const {
    if (auto id = tags_.find(k)) return TagHandle{*id};
    return std::nullopt;
  }

  const std::string& key(UserHandle u) const { return users_.key(u.value); }
  const std::string& key(ItemHandle i) const { return items_.key(i.value); }
  const std::string& key(TagHandle t) const { return tags_.key(t.value); }

  std::size_t user_count() const { return users_.size(); }
  std::size_t item_count() const { return items_.size(); }
  std::size_t tag_count() const { return tags_.size(); }
  std::size_t user_item_edge_count() const { return user_item_edges_; }
  std::size_t item_tag_edge_count() const { return item_tag_edges_; }
  bool empty() const { return user_count() == 0 && item_count() == 0 && tag_count() == 0; }

  std::span<const ItemHandle> items_of(UserHandle u) const { return user_items_[u.value]; }
  std::span<const UserHandle> users_of(ItemHandle i) const { return item_users_[i.value]; }
  std::span<const TagHandle> tags_of(ItemHandle i) const { return item_tags_[i.value]; }
  std::span<const ItemHandle> items_of(TagHandle t) const { return tag_items_[t.value]; }

  /// k_i(u): number of items of a user.
  std::size_t degree(UserHandle u) const { return user_items_[u.value].size(); }
  /// k_i(t): number of items carrying a tag.
  std::size_t degree(TagHandle t) const { return tag_items_[t.value].size(); }
  /// k_u(i): popularity of an item.
  std::size_t user_degree(ItemHandle i) const { return item_users_[i.value].size(); }
  /// k_t(i): number of tags on an item.
  std::size_t tag_degree(ItemHandle i) const { return item_tags_[i.value].size(); }

  bool has_edge(UserHandle u, ItemHandle i) const {
    return detail::sorted_find(user_items_[u.value], i).has_value();
  }
  bool has_edge(ItemHandle i, TagHandle t) const {
    return detail::sorted_find(item_tags_[i.value], t).has_value();
  }
  std::optional<Seconds> edge_time(UserHandle u, ItemHandle i) const {
    auto pos = detail::sorted_find(user_items_[u.value], i);
    if (!pos) return std::nullopt;
    return user_item_times_[u.value][*pos];
  }
  std::optional<Seconds> edge_time(ItemHandle i, TagHandle t) const {
    auto pos = detail::sorted_find(item_tags_[i.value], t);
    if (!pos) return std::nullopt;
    return item_tag_times_[i.value][*pos];
  }
  Seconds created_at(ItemHandle i) const { return item_created_[i.value]; }

  /// Derived user-tag view: tags of all items of `u`, sorted, unique.
  std::vector<TagHandle> tags_of(UserHandle u) const {
    std::vector<TagHandle> out;
    for (ItemHandle i : items_of(u)) {
      auto tags = tags_of(i);
      out.insert(out.end(), tags.begin(), tags.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Key-level equality: same node key sets, same edges, same timestamps.
  /// Independent of interning order.
  friend double graph_jaccard(const FolksonomyGraph& a, const FolksonomyGraph& b);

  friend bool operator==(const FolksonomyGraph& a, const FolksonomyGraph& b) {
    return a.canonical() == b.canonical();
  }

 private:
  struct Canonical {
    std::vector<std::string> users, tags;
    std::vector<std::pair<std::string, Seconds>> items;
    std::vector<std::tuple<std::string, std::string, Seconds>> user_items, item_tags;
    bool operator==(const Canonical&) const = default;
  };

  Canonical canonical() const {
    Canonical c;
    for (std::uint32_t u = 0; u < user_count(); ++u) {
      c.users.push_back(key(UserHandle{u}));
      for (ItemHandle i : items_of(UserHandle{u})) {
        c.user_items.emplace_back(key(UserHandle{u}), key(i), *edge_time(UserHandle{u}, i));
      }
    }
    for (std::uint32_t t = 0; t < tag_count(); ++t) c.tags.push_back(key(TagHandle{t}));
    for (std::uint32_t i = 0; i < item_count(); ++i) {
      c.items.emplace_back(key(ItemHandle{i}), item_created_[i]);
      for (TagHandle t : tags_of(ItemHandle{i})) {
        c.item_tags.emplace_back(key(ItemHandle{i}), key(t), *edge_time(ItemHandle{i}, t));
      }
    }
    std::sort(c.users.begin(), c.users.end());
    std::sort(c.tags.begin(), c.tags.end());
    std::sort(c.items.begin(), c.items.end());
    std::sort(c.user_items.begin(), c.user_items.end());
    std::sort(c.item_tags.begin(), c.item_tags.end());
    return c;
  }

  UserHandle ensure_user(std::string_view k) {
    auto [id, fresh] = users_.intern(k);
    if (fresh) user_items_.emplace_back(), user_item_times_.emplace_back();
    return UserHandle{id};
  }

  TagHandle ensure_tag(std::string_view k) {
    auto [id, fresh] = tags_.intern(k);
    if (fresh) tag_items_.emplace_back();
    return TagHandle{id};
  }

  UserHandle import_user(const FolksonomyGraph& src, UserHandle u) {
    auto [id, fresh] = users_.intern_symbol(src.users_.symbol(u.value), src.users_.name_ptr(u.value));
    if (fresh) user_items_.emplace_back(), user_item_times_.emplace_back();
    return UserHandle{id};
  }

  TagHandle import_tag(const FolksonomyGraph& src, TagHandle t) {
    auto [id, fresh] = tags_.intern_symbol(src.tags_.symbol(t.value), src.tags_.name_ptr(t.value));
    if (fresh) tag_items_.emplace_back();
    return TagHandle{id};
  }

  ItemHandle ensure_item(std::string_view k, Seconds created) {
    auto [id, fresh] = items_.intern(k);
    if (fresh) {
      grow_item();
      item_created_.back() = created;
    } else {
      item_created_[id] = std::min(item_created_[id], created);
    }
    return ItemHandle{id};
  }

  void grow_item() {
    item_users_.emplace_back();
    item_tags_.emplace_back();
    item_tag_times_.emplace_back();
    item_created_.push_back(0);
  }

  void link(UserHandle u, ItemHandle i, Seconds time) {
    auto& adj = user_items_[u.value];
    auto& times = user_item_times_[u.value];
    if (auto pos = detail::sorted_find(adj, i)) {
      times[*pos] = std::min(times[*pos], time);
      return;
    }
    times.insert(times.begin() + static_cast<std::ptrdiff_t>(detail::sorted_insert(adj, i)), time);
    detail::sorted_insert(item_users_[i.value], u);
    ++user_item_edges_;
  }

  void link(ItemHandle i, TagHandle t, Seconds time) {
    auto& adj = item_tags_[i.value];
    auto& times = item_tag_times_[i.value];
    if (auto pos = detail::sorted_find(adj, t)) {
      times[*pos] = std::min(times[*pos], time);
      return;
    }
    times.insert(times.begin() + static_cast<std::ptrdiff_t>(detail::sorted_insert(adj, t)), time);
    detail::sorted_insert(tag_items_[t.value], i);
    ++item_tag_edges_;
  }

  detail::KeyTable users_, items_, tags_;
  std::vector<std::vector<ItemHandle>> user_items_;
  std::vector<std::vector<UserHandle>> item_users_;
  std::vector<std::vector<TagHandle>> item_tags_;
  std::vector<std::vector<ItemHandle>> tag_items_;
  std::vector<Seconds> item_created_;
  // Edge timestamps, parallel to user_items_ and item_tags_.
  std::vector<std::vector<Seconds>> user_item_times_, item_tag_times_;
  std::size_t user_item_edges_ = 0, item_tag_edges_ = 0;
};

/// Jaccard index between the flattened forms of two graphs, computed by key
/// lookup instead of materializing both edge lists. Equal to
/// `jaccard(a.flatten(), b.flatten())`; two empty graphs give 1.
inline double graph_jaccard(const FolksonomyGraph& a, const FolksonomyGraph& b) {
  const std::size_t size_a = a.user_item_edge_count() + a.item_tag_edge_count();
  const std::size_t size_b = b.user_item_edge_count() + b.item_tag_edge_count();
  if (size_a == 0 && size_b == 0) return 1.0;
  std::vector<std::optional<ItemHandle>> item_map(a.item_count());
  for (std::uint32_t i = 0; i < a.item_count(); ++i) {
    if (auto id = b.items_.find_symbol(a.items_.symbol(i))) item_map[i] = ItemHandle{*id};
  }
  std::size_t shared = 0;
  for (std::uint32_t u = 0; u < a.user_count(); ++u) {
    auto id = b.users_.find_symbol(a.users_.symbol(u));
    if (!id) continue;
    const UserHandle bu{*id};
    for (ItemHandle i : a.items_of(UserHandle{u})) {
      if (item_map[i.value] && b.has_edge(bu, *item_map[i.value])) ++shared;
    }
  }
  std::vector<std::optional<TagHandle>> tag_map(a.tag_count());
  for (std::uint32_t t = 0; t < a.tag_count(); ++t) {
    if (auto id = b.tags_.find_symbol(a.tags_.symbol(t))) tag_map[t] = TagHandle{*id};
  }
  for (std::uint32_t i = 0; i < a.item_count(); ++i) {
    if (!item_map[i]) continue;
    for (TagHandle t : a.tags_of(ItemHandle{i})) {
      if (tag_map[t.value] && b.has_edge(*item_map[i], *tag_map[t.value])) ++shared;
    }
  }
  return static_cast<double>(shared) / static_cast<double>(size_a + size_b - shared);
}

}  // namespace pliers
