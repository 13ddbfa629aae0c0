#include "synthpop/survey.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <utility>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "synthpop/csv.hpp"

namespace synthpop {
namespace {

struct LabelRule {
  std::string_view raw;
  Activity activity;
};

constexpr LabelRule kLabelRules[] = {
    {"At Home", Activity::Home},
    {"Go Home", Activity::Home},
    {"Unknown Purpose (at start of day)", Activity::Home},
    {"Social", Activity::SocialRecreational},
    {"Recreational", Activity::SocialRecreational},
    {"Pick-up or Drop-off Someone", Activity::PickupDropoffDeliver},
    {"Pick-up or Deliver Something", Activity::PickupDropoffDeliver},
    {"Other Purpose", Activity::Other},
    {"Not Stated", Activity::Other},
    {"Personal Business", Activity::Personal},
    {"Work Related", Activity::Work},
    {"Education", Activity::Study},
    {"Buy Something", Activity::Shop},
    {"Change Mode", Activity::ModeChange},
    {"Accompany Someone", Activity::WithSomeone},
};

struct ModeRule {
  std::string_view raw;
  Mode mode;
};

constexpr ModeRule kModeRules[] = {
    {"Walking", Mode::Walk},        {"Jogging", Mode::Walk},
    {"Mobility Scooter", Mode::Walk}, {"Bicycle", Mode::Cycle},
    {"Train", Mode::Pt},            {"Tram", Mode::Pt},
    {"Public Bus", Mode::Pt},       {"School Bus", Mode::Pt},
    {"Vehicle Driver", Mode::Car},  {"Vehicle Passenger", Mode::Car},
    {"Taxi", Mode::Car},            {"Motorcycle", Mode::Car},
};

int parse_minute(std::string_view field, const std::string& source, std::size_t line,
                 std::string_view column) {
  if (auto v = csv::parse_int(field)) return static_cast<int>(*v);
  if (auto d = csv::parse_double(field); d && std::floor(*d) == *d) {
    return static_cast<int>(*d);
  }
  throw DataError(fmt::format("{}:{}: unparseable minute value '{}' in column '{}'", source,
                              line, field, column));
}

std::optional<double> optional_double(const csv::Row& row, std::optional<std::size_t> col) {
  if (!col) return std::nullopt;
  return csv::parse_double(row[*col]);
}

}  // namespace

std::size_t TripTable::trip_count() const {
  std::size_t n = 0;
  for (const auto& p : persons) n += p.trips.size();
  return n;
}

TripTable parse_trip_table(const std::filesystem::path& path, DayFilter day,
                           const TripSchema& schema, Diagnostics* diag) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trip table '" + path.string() + "'");
  return parse_trip_table(in, day, schema, diag, path.string());
}

TripTable parse_trip_table(std::istream& in, DayFilter day, const TripSchema& schema,
                           Diagnostics* diag, const std::string& source) {
  csv::Reader reader(in, source);
  const std::size_t c_person = reader.require(schema.person_id);
  const std::size_t c_orig = reader.require(schema.orig_purpose);
  const std::size_t c_dest = reader.require(schema.dest_purpose);
  const std::size_t c_start = reader.require(schema.start_time);
  const std::size_t c_arrive = reader.require(schema.arrive_time);
  const std::string& weight_name =
      day == DayFilter::Weekday ? schema.weekday_weight : schema.weekend_weight;
  const std::size_t c_weight = reader.require(weight_name);

  const auto c_survey_w = reader.find(schema.survey_weight);
  const auto c_ox = reader.find(schema.orig_x);
  const auto c_oy = reader.find(schema.orig_y);
  const auto c_dx = reader.find(schema.dest_x);
  const auto c_dy = reader.find(schema.dest_y);
  const auto c_mode = reader.find(schema.link_mode);
  const auto c_day = reader.find(schema.travel_day);
  const auto c_age = reader.find(schema.age);
  const auto c_sex = reader.find(schema.sex);

  TripTable table;
  std::unordered_map<std::string, std::size_t> person_index;
  csv::Row row;
  while (reader.next(row)) {
    const std::size_t line = reader.line_number();
    const std::string_view weight_field = csv::trim(row[c_weight]);
    std::optional<double> weight;
    if (!weight_field.empty()) {
      weight = csv::parse_double(weight_field);
      if (!weight || *weight < 0.0) {
        throw DataError(fmt::format("{}:{}: invalid weight '{}' in column '{}'", source, line,
                                    weight_field, weight_name));
      }
    }
    if (!weight || *weight == 0.0) {
      note(diag, "ingest.rows_without_day_weight");
      continue;
    }

    TripRecord trip;
    trip.person_id = std::string(csv::trim(row[c_person]));
    trip.orig_purpose = std::string(csv::trim(row[c_orig]));
    trip.dest_purpose = std::string(csv::trim(row[c_dest]));
    trip.start_time = parse_minute(row[c_start], source, line, schema.start_time);
    trip.arrive_time = parse_minute(row[c_arrive], source, line, schema.arrive_time);
    trip.weight = *weight;
    trip.line = line;
    trip.survey_weight = optional_double(row, c_survey_w);
    if (auto x = optional_double(row, c_ox), y = optional_double(row, c_oy); x && y) {
      trip.orig_coord = Point{*x, *y};
    }
    if (auto x = optional_double(row, c_dx), y = optional_double(row, c_dy); x && y) {
      trip.dest_coord = Point{*x, *y};
    }
    if (c_mode && !csv::trim(row[*c_mode]).empty()) {
      trip.link_mode = std::string(csv::trim(row[*c_mode]));
    }
    if (c_day && !csv::trim(row[*c_day]).empty()) {
      trip.travel_day = std::string(csv::trim(row[*c_day]));
    }

    auto [it, inserted] = person_index.try_emplace(trip.person_id, table.persons.size());
    if (inserted) {
      table.persons.push_back(PersonTrips{trip.person_id, std::nullopt, std::nullopt, {}});
    }
    PersonTrips& person = table.persons[it->second];
    if (!person.gender && c_sex) person.gender = parse_gender(csv::trim(row[*c_sex]));
    if (!person.age && c_age) {
      if (auto a = csv::parse_int(row[*c_age])) person.age = static_cast<int>(*a);
    }
    person.trips.push_back(std::move(trip));
  }
  return table;
}

std::vector<ActivityRecord> derive_activity_table(const TripTable& table, Diagnostics* diag) {
  std::vector<ActivityRecord> out;
  for (const PersonTrips& person : table.persons) {
    const auto& trips = person.trips;
    if (trips.empty()) continue;

    bool valid = true;
    for (std::size_t k = 0; k < trips.size() && valid; ++k) {
      const TripRecord& t = trips[k];
      if (t.start_time < 0 || t.arrive_time > kLastMinute || t.arrive_time < t.start_time) {
        valid = false;
      } else if (k + 1 < trips.size() && trips[k + 1].start_time < t.arrive_time) {
        valid = false;
      }
    }
    if (!valid) {
      warn(diag, "ingest.persons_skipped_chronology",
           fmt::format("person {} skipped: trips overlap or leave the day", person.person_id));
      continue;
    }

    out.push_back({person.person_id, trips.front().orig_purpose, 0, trips.front().start_time,
                   trips.front().weight});
    for (std::size_t k = 0; k < trips.size(); ++k) {
      const bool last = k + 1 == trips.size();
      const int end = last ? kLastMinute : trips[k + 1].start_time;
      const std::string& label = last ? trips[k].dest_purpose : trips[k + 1].orig_purpose;
      out.push_back({person.person_id, label, trips[k].arrive_time, end, trips[k].weight});
    }
  }
  return out;
}

Activity simplify_label(std::string_view raw, Diagnostics* diag) {
  const std::string_view label = csv::trim(raw);
  for (const auto& rule : kLabelRules) {
    if (rule.raw == label) return rule.activity;
  }
  if (auto canonical = parse_activity(label)) return *canonical;
  note(diag, "ingest.unknown_labels");
  spdlog::debug("unknown activity label '{}' mapped to Other", label);
  return Activity::Other;
}

std::vector<ActivityRecord> simplify_labels(std::vector<ActivityRecord> activities,
                                            Diagnostics* diag) {
  for (auto& a : activities) a.activity = std::string(to_string(simplify_label(a.activity, diag)));
  return activities;
}

std::vector<SurveyPerson> survey_persons(const TripTable& trips, Diagnostics* diag) {
  std::vector<SurveyPerson> out;
  for (const auto& p : trips.persons) {
    if (!p.gender || !p.age || *p.age < 0) {
      note(diag, "ingest.persons_without_demographics");
      continue;
    }
    out.push_back({p.person_id, *p.gender, *p.age});
  }
  return out;
}

std::optional<Mode> reclassify_link_mode(std::string_view raw) {
  const std::string_view label = csv::trim(raw);
  for (const auto& rule : kModeRules) {
    if (rule.raw == label) return rule.mode;
  }
  return parse_mode(label);
}

std::vector<SurveyTrip> extract_survey_trips(const TripTable& table, Diagnostics* diag) {
  std::vector<SurveyTrip> out;
  for (const auto& person : table.persons) {
    for (const auto& t : person.trips) {
      if (!t.orig_coord || !t.dest_coord || !t.link_mode) {
        note(diag, "ingest.trips_without_location_or_mode");
        continue;
      }
      auto mode = reclassify_link_mode(*t.link_mode);
      if (!mode) {
        note(diag, "ingest.trips_unknown_mode");
        continue;
      }
      const double w = t.survey_weight.value_or(t.weight);
      if (!(w > 0.0)) {
        note(diag, "ingest.trips_without_survey_weight");
        continue;
      }
      out.push_back({t.person_id, *t.orig_coord, *t.dest_coord, *mode, w,
                     simplify_label(t.dest_purpose, diag)});
    }
  }
  return out;
}

void write_activity_table(const std::filesystem::path& path,
                          std::span<const ActivityRecord> activities) {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  w.row({"person_id", "activity", "start_minute", "end_minute", "weight"});
  for (const auto& a : activities) {
    w.row({a.person_id, a.activity, std::to_string(a.start_minute), std::to_string(a.end_minute),
           csv::format_double(a.weight)});
  }
  file.commit();
}

std::vector<ActivityRecord> read_activity_table(const std::filesystem::path& path) {
  csv::Reader r(path);
  const auto c_p = r.require("person_id");
  const auto c_a = r.require("activity");
  const auto c_s = r.require("start_minute");
  const auto c_e = r.require("end_minute");
  const auto c_w = r.require("weight");
  std::vector<ActivityRecord> out;
  csv::Row row;
  while (r.next(row)) {
    auto s = csv::parse_int(row[c_s]);
    auto e = csv::parse_int(row[c_e]);
    auto w = csv::parse_double(row[c_w]);
    if (!s || !e || !w) {
      throw DataError(fmt::format("{}:{}: malformed activity row", r.source(), r.line_number()));
    }
    out.push_back({row[c_p], row[c_a], static_cast<int>(*s), static_cast<int>(*e), *w});
  }
  return out;
}

void write_survey_persons(const std::filesystem::path& path,
                          std::span<const SurveyPerson> persons) {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  w.row({"person_id", "gender", "age"});
  for (const auto& p : persons) {
    w.row({p.person_id, std::string(to_string(p.gender)), std::to_string(p.age)});
  }
  file.commit();
}

std::vector<SurveyPerson> read_survey_persons(const std::filesystem::path& path) {
  csv::Reader r(path);
  const auto c_p = r.require("person_id");
  const auto c_g = r.require("gender");
  const auto c_a = r.require("age");
  std::vector<SurveyPerson> out;
  csv::Row row;
  while (r.next(row)) {
    auto g = parse_gender(row[c_g]);
    auto a = csv::parse_int(row[c_a]);
    if (!g || !a) {
      throw DataError(fmt::format("{}:{}: malformed person row", r.source(), r.line_number()));
    }
    out.push_back({row[c_p], *g, static_cast<int>(*a)});
  }
  return out;
}

void write_survey_trips(const std::filesystem::path& path, std::span<const SurveyTrip> trips) {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  w.row({"person_id", "orig_x", "orig_y", "dest_x", "dest_y", "mode", "weight",
         "dest_activity"});
  for (const auto& t : trips) {
    w.row({t.person_id, csv::format_double(t.origin.x), csv::format_double(t.origin.y),
           csv::format_double(t.destination.x), csv::format_double(t.destination.y),
           std::string(to_string(t.mode)), csv::format_double(t.weight),
           std::string(to_string(t.dest_activity))});
  }
  file.commit();
}

std::vector<SurveyTrip> read_survey_trips(const std::filesystem::path& path) {
  csv::Reader r(path);
  const auto c_p = r.require("person_id");
  const auto c_ox = r.require("orig_x");
  const auto c_oy = r.require("orig_y");
  const auto c_dx = r.require("dest_x");
  const auto c_dy = r.require("dest_y");
  const auto c_m = r.require("mode");
  const auto c_w = r.require("weight");
  const auto c_a = r.require("dest_activity");
  std::vector<SurveyTrip> out;
  csv::Row row;
  while (r.next(row)) {
    auto ox = csv::parse_double(row[c_ox]);
    auto oy = csv::parse_double(row[c_oy]);
    auto dx = csv::parse_double(row[c_dx]);
    auto dy = csv::parse_double(row[c_dy]);
    auto m = parse_mode(row[c_m]);
    auto w = csv::parse_double(row[c_w]);
    auto a = parse_activity(row[c_a]);
    if (!ox || !oy || !dx || !dy || !m || !w || !a) {
      throw DataError(fmt::format("{}:{}: malformed survey trip row", r.source(),
                                  r.line_number()));
    }
    out.push_back({row[c_p], {*ox, *oy}, {*dx, *dy}, *m, *w, *a});
  }
  return out;
}

}  // namespace synthpop
