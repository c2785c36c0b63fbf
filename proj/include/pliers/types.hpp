#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pliers {

/// Simulation time in integer seconds since the trace epoch.
using Seconds = std::int64_t;

enum class EntityKind : std::uint8_t { User, Item, Tag };

inline const char* to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::User: return "User";
    case EntityKind::Item: return "Item";
    case EntityKind::Tag: return "Tag";
  }
  return "?";
}

/// External identity of a node: its kind plus its string key. The same key may
/// name both a tag and an item without collision.
struct EntityId {
  EntityKind kind;
  std::string key;

  auto operator<=>(const EntityId&) const = default;
};

/// Dense per-graph index of an interned node. The tag type keeps user, item and
/// tag handles from being mixed up.
template <class Kind>
struct Handle {
  std::uint32_t value = 0;

  auto operator<=>(const Handle&) const = default;
};

struct UserKind;
struct ItemKind;
struct TagKind;
using UserHandle = Handle<UserKind>;
using ItemHandle = Handle<ItemKind>;
using TagHandle = Handle<TagKind>;

/// Input that violates a documented precondition (empty tag list, bad window, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pliers
