#include "synthpop/common.hpp"

#include <algorithm>
#include <cctype>

#include <spdlog/spdlog.h>

namespace synthpop {
namespace {

constexpr std::array<std::string_view, kNumActivities> kActivityNames = {
    "Home",  "Mode Change",         "Other",
    "Personal", "Pickup/Dropoff/Deliver", "Shop",
    "Social/Recreational", "Study", "With Someone",
    "Work"};

constexpr std::array<std::string_view, kNumModes> kModeNames = {"walk", "cycle", "pt",
                                                               "car"};

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "home", "work", "education", "commercial", "park"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Activity a) { return kActivityNames[index_of(a)]; }

std::optional<Activity> parse_activity(std::string_view name) {
  for (int i = 0; i < kNumActivities; ++i) {
    if (kActivityNames[i] == name) return static_cast<Activity>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Mode m) { return kModeNames[index_of(m)]; }

std::optional<Mode> parse_mode(std::string_view name) {
  const std::string l = lower(name);
  if (l == "bike" || l == "bicycle") return Mode::Cycle;
  for (int i = 0; i < kNumModes; ++i) {
    if (kModeNames[i] == l) return static_cast<Mode>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Category c) { return kCategoryNames[index_of(c)]; }

std::optional<Category> parse_category(std::string_view name) {
  const std::string l = lower(name);
  for (int i = 0; i < kNumCategories; ++i) {
    if (kCategoryNames[i] == l) return static_cast<Category>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Gender g) { return g == Gender::Female ? "female" : "male"; }

std::optional<Gender> parse_gender(std::string_view name) {
  const std::string l = lower(name);
  if (l == "f" || l == "female" || l == "2") return Gender::Female;
  if (l == "m" || l == "male" || l == "1") return Gender::Male;
  return std::nullopt;
}

void Diagnostics::add(const std::string& key, long count) {
  std::lock_guard lock(mutex_);
  counters_[key] += count;
}

void Diagnostics::warn(const std::string& key, std::string_view message) {
  add(key);
  spdlog::warn("[{}] {}", key, message);
}

long Diagnostics::get(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = counters_.find(key);
  return it == counters_.end() ? 0 : it->second;
}

std::map<std::string, long> Diagnostics::snapshot() const {
  std::lock_guard lock(mutex_);
  return counters_;
}

void Diagnostics::merge(const Diagnostics& other) {
  for (const auto& [k, v] : other.snapshot()) add(k, v);
}

void Diagnostics::log_summary(std::string_view stage) const {
  for (const auto& [k, v] : snapshot()) {
    spdlog::info("stage={} counter={} value={}", stage, k, v);
  }
}

void warn(Diagnostics* d, const std::string& key, std::string_view message) {
  if (d != nullptr) {
    d->warn(key, message);
  } else {
    spdlog::warn("[{}] {}", key, message);
  }
}

}  // namespace synthpop
