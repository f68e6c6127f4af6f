#include "rmcoop/event.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <unordered_map>

namespace rmc {

namespace {

struct Registry {
  std::mutex mutex;
  std::deque<std::string> names;
  std::unordered_map<std::string, std::uint32_t> ids;
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

Event Event::intern(std::string_view symbol) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  auto it = r.ids.find(std::string(symbol));
  if (it != r.ids.end()) return Event(it->second);
  auto id = static_cast<std::uint32_t>(r.names.size());
  r.names.emplace_back(symbol);
  r.ids.emplace(std::string(symbol), id);
  return Event(id);
}

std::string Event::name() const {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  return id_ < r.names.size() ? r.names[id_] : std::string("?");
}

EventAlphabet::EventAlphabet(std::initializer_list<std::string_view> symbols) {
  for (auto s : symbols) insert(Event::intern(s));
}

EventAlphabet::EventAlphabet(const std::vector<std::string>& symbols) {
  for (const auto& s : symbols) insert(Event::intern(s));
}

EventAlphabet::EventAlphabet(const std::vector<Event>& events) {
  for (auto e : events) insert(e);
}

bool EventAlphabet::insert(Event e) {
  if (contains(e)) return false;
  if (e.id() >= position_by_id_.size()) position_by_id_.resize(e.id() + 1, -1);
  position_by_id_[e.id()] = static_cast<int>(events_.size());
  events_.push_back(e);
  return true;
}

bool EventAlphabet::is_subset_of(const EventAlphabet& other) const {
  return std::all_of(events_.begin(), events_.end(),
                     [&](Event e) { return other.contains(e); });
}

bool EventAlphabet::same_set(const EventAlphabet& other) const {
  return size() == other.size() && is_subset_of(other);
}

EventAlphabet EventAlphabet::united(const EventAlphabet& other) const {
  EventAlphabet out = *this;
  for (auto e : other) out.insert(e);
  return out;
}

EventAlphabet EventAlphabet::without(Event e) const {
  EventAlphabet out;
  for (auto x : events_)
    if (x != e) out.insert(x);
  return out;
}

std::vector<std::string> EventAlphabet::names() const {
  std::vector<std::string> out;
  out.reserve(events_.size());
  for (auto e : events_) out.push_back(e.name());
  return out;
}

EventString make_event_string(std::string_view text) {
  EventString out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\n' || c == '\r'; };
  while (i < text.size()) {
    while (i < text.size() && is_sep(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_sep(text[j])) ++j;
    if (j > i) out.push_back(Event::intern(text.substr(i, j - i)));
    i = j;
  }
  return out;
}

std::string to_string(const EventString& xi) {
  std::string out;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (i) out += ' ';
    out += xi[i].name();
  }
  return out;
}

}  // namespace rmc
