#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace rmc {

/// Interned event symbol. Two events compare equal iff they were interned
/// from the same string; the handle is a process-wide integer id.
class Event {
 public:
  Event() = default;

  static Event intern(std::string_view symbol);

  std::uint32_t id() const { return id_; }
  std::string name() const;

  friend bool operator==(Event a, Event b) { return a.id_ == b.id_; }
  friend bool operator!=(Event a, Event b) { return a.id_ != b.id_; }
  friend bool operator<(Event a, Event b) { return a.id_ < b.id_; }

 private:
  explicit Event(std::uint32_t id) : id_(id) {}
  std::uint32_t id_ = 0;
};

/// Ordered set of events; iteration follows insertion order.
class EventAlphabet {
 public:
  EventAlphabet() = default;
  EventAlphabet(std::initializer_list<std::string_view> symbols);
  explicit EventAlphabet(const std::vector<std::string>& symbols);
  explicit EventAlphabet(const std::vector<Event>& events);

  /// Adds `e` if absent. Returns false when it was already present.
  bool insert(Event e);

  bool contains(Event e) const { return position(e) >= 0; }
  /// Position of `e` in insertion order, -1 if absent.
  int position(Event e) const {
    return e.id() < position_by_id_.size() ? position_by_id_[e.id()] : -1;
  }

  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  Event operator[](std::size_t i) const { return events_[i]; }
  const std::vector<Event>& events() const { return events_; }
  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }

  bool is_subset_of(const EventAlphabet& other) const;
  /// Set equality, ignoring order.
  bool same_set(const EventAlphabet& other) const;
  /// Events of `*this` followed by events of `other` not already present.
  EventAlphabet united(const EventAlphabet& other) const;
  EventAlphabet without(Event e) const;

  std::vector<std::string> names() const;

  /// Order-sensitive equality.
  friend bool operator==(const EventAlphabet& a, const EventAlphabet& b) {
    return a.events_ == b.events_;
  }

 private:
  std::vector<Event> events_;
  std::vector<int> position_by_id_;
};

using EventString = std::vector<Event>;

/// Splits on whitespace and commas and interns each token.
EventString make_event_string(std::string_view text);
std::string to_string(const EventString& xi);

}  // namespace rmc

template <>
struct std::hash<rmc::Event> {
  std::size_t operator()(rmc::Event e) const noexcept { return e.id(); }
};
