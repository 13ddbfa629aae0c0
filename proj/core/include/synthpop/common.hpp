#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace synthpop {

/// Base class for all errors raised by the pipeline. Each carries the process
/// exit code the command line tool reports for it.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// Bad configuration or parameter (exit code 2).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 2) {}
};

/// Malformed or inconsistent input data (exit code 3).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what, 3) {}
};

/// Internal invariant violation (exit code 4).
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(what, 4) {}
};

// Canonical activity set produced by label simplification.
enum class Activity : std::uint8_t {
  Home,
  ModeChange,
  Other,
  Personal,
  PickupDropoffDeliver,
  Shop,
  SocialRecreational,
  Study,
  WithSomeone,
  Work,
};
inline constexpr int kNumActivities = 10;

inline constexpr std::array<Activity, kNumActivities> kAllActivities = {
    Activity::Home,  Activity::ModeChange,         Activity::Other,
    Activity::Personal, Activity::PickupDropoffDeliver, Activity::Shop,
    Activity::SocialRecreational, Activity::Study, Activity::WithSomeone,
    Activity::Work};

constexpr int index_of(Activity a) { return static_cast<int>(a); }
std::string_view to_string(Activity a);
std::optional<Activity> parse_activity(std::string_view name);

enum class Mode : std::uint8_t { Walk, Cycle, Pt, Car };
inline constexpr int kNumModes = 4;
inline constexpr std::array<Mode, kNumModes> kAllModes = {Mode::Walk, Mode::Cycle,
                                                         Mode::Pt, Mode::Car};

constexpr int index_of(Mode m) { return static_cast<int>(m); }
constexpr bool is_vehicle(Mode m) { return m == Mode::Car || m == Mode::Cycle; }
std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view name);

// Location categories that candidate locations and plan items are typed with.
enum class Category : std::uint8_t { Home, Work, Education, Commercial, Park };
inline constexpr int kNumCategories = 5;
inline constexpr std::array<Category, kNumCategories> kAllCategories = {
    Category::Home, Category::Work, Category::Education, Category::Commercial,
    Category::Park};
// Categories that have a destination-attraction surface.
inline constexpr std::array<Category, 4> kDestinationCategories = {
    Category::Work, Category::Education, Category::Commercial, Category::Park};

constexpr int index_of(Category c) { return static_cast<int>(c); }
std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);

enum class Gender : std::uint8_t { Female, Male };
std::string_view to_string(Gender g);
std::optional<Gender> parse_gender(std::string_view name);

/// Named diagnostic counters (skipped persons, relaxed filters, fallbacks...).
/// Thread safe; every increment is also logged at debug level.
class Diagnostics {
 public:
  void add(const std::string& key, long count = 1);
  /// Increments `key` and logs `message` at warning level.
  void warn(const std::string& key, std::string_view message);
  long get(const std::string& key) const;
  std::map<std::string, long> snapshot() const;
  void merge(const Diagnostics& other);
  void log_summary(std::string_view stage) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, long> counters_;
};

// Null-tolerant helpers so module functions can take an optional sink.
inline void note(Diagnostics* d, const std::string& key, long count = 1) {
  if (d != nullptr) d->add(key, count);
}
void warn(Diagnostics* d, const std::string& key, std::string_view message);

}  // namespace synthpop
