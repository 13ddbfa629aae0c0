#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthpop/common.hpp"
#include "synthpop/geometry.hpp"

namespace synthpop {

enum class DayFilter { Weekday, Weekend };

/// Column names of the travel-survey trip table. Defaults follow the VISTA
/// Trip Table; any survey with equivalent columns can be mapped in.
struct TripSchema {
  std::string person_id = "PERSID";
  std::string orig_purpose = "ORIGPURP1";
  std::string dest_purpose = "DESTPURP1";
  std::string start_time = "STARTIME";
  std::string arrive_time = "ARRTIME";
  std::string weekday_weight = "WDTRIPWGT";
  std::string weekend_weight = "WEJTEWGT";
  // Optional columns used by the spatial stage and cohort building.
  std::string survey_weight = "CW_WDTRIPWGT_SA3";
  std::string orig_x = "ORIGX";
  std::string orig_y = "ORIGY";
  std::string dest_x = "DESTX";
  std::string dest_y = "DESTY";
  std::string link_mode = "LINKMODE";
  std::string travel_day = "TRAVDOW";
  std::string age = "AGE";
  std::string sex = "SEX";
};

struct TripRecord {
  std::string person_id;
  std::string orig_purpose;
  std::string dest_purpose;
  int start_time = 0;   // minutes past midnight
  int arrive_time = 0;  // minutes past midnight
  double weight = 0.0;  // day weight selected by the DayFilter
  std::optional<Point> orig_coord;
  std::optional<Point> dest_coord;
  std::optional<std::string> link_mode;
  std::optional<std::string> travel_day;
  std::optional<double> survey_weight;
  std::size_t line = 0;  // source line, for diagnostics
};

struct PersonTrips {
  std::string person_id;
  std::optional<Gender> gender;
  std::optional<int> age;
  std::vector<TripRecord> trips;  // file order
};

struct TripTable {
  std::vector<PersonTrips> persons;  // order of first appearance
  std::size_t trip_count() const;
};

/// Reads the trip table. Rows whose weight for the selected day is blank or
/// zero are dropped. Throws DataError naming a missing required column, or
/// giving the line number of an unparseable time or weight.
TripTable parse_trip_table(const std::filesystem::path& path, DayFilter day,
                           const TripSchema& schema = {}, Diagnostics* diag = nullptr);
TripTable parse_trip_table(std::istream& in, DayFilter day, const TripSchema& schema = {},
                           Diagnostics* diag = nullptr, const std::string& source = "<stream>");

struct ActivityRecord {
  std::string person_id;
  std::string activity;
  int start_minute = 0;
  int end_minute = 0;
  double weight = 0.0;
  friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

inline constexpr int kLastMinute = 1439;

/// Trips -> activities: activity k spans the arrival of trip k to the start of
/// trip k+1 and takes the purpose trip k+1 leaves from; the first starts at
/// midnight and the last, labelled by the final destination, ends at 1439.
/// Persons whose trips overlap or run backwards are skipped.
std::vector<ActivityRecord> derive_activity_table(const TripTable& trips,
                                                  Diagnostics* diag = nullptr);

/// Maps a raw survey purpose label onto the canonical activity set. Unknown
/// labels become Other.
Activity simplify_label(std::string_view raw, Diagnostics* diag = nullptr);
std::vector<ActivityRecord> simplify_labels(std::vector<ActivityRecord> activities,
                                            Diagnostics* diag = nullptr);

/// Survey participant attributes needed for cohort building.
struct SurveyPerson {
  std::string person_id;
  Gender gender = Gender::Female;
  int age = 0;
};

/// Persons with both gender and age known; the others are counted.
std::vector<SurveyPerson> survey_persons(const TripTable& trips, Diagnostics* diag = nullptr);

/// A located, moded survey trip used for mode-choice and destination models.
struct SurveyTrip {
  std::string person_id;
  Point origin;
  Point destination;
  Mode mode = Mode::Walk;
  double weight = 0.0;
  Activity dest_activity = Activity::Other;
};

/// Reclassifies a survey link-mode label ("Vehicle Driver", "Tram", ...).
std::optional<Mode> reclassify_link_mode(std::string_view raw);

/// Trips with both coordinates and a recognised mode. The weight is the
/// survey (mode-choice) weight column when present, else the day weight.
std::vector<SurveyTrip> extract_survey_trips(const TripTable& trips,
                                             Diagnostics* diag = nullptr);

void write_activity_table(const std::filesystem::path& path,
                          std::span<const ActivityRecord> activities);
std::vector<ActivityRecord> read_activity_table(const std::filesystem::path& path);

void write_survey_persons(const std::filesystem::path& path,
                          std::span<const SurveyPerson> persons);
std::vector<SurveyPerson> read_survey_persons(const std::filesystem::path& path);

void write_survey_trips(const std::filesystem::path& path, std::span<const SurveyTrip> trips);
std::vector<SurveyTrip> read_survey_trips(const std::filesystem::path& path);

}  // namespace synthpop
