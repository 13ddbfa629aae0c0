#include <sstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "synthpop/survey.hpp"

using namespace synthpop;

namespace {

const char* kHousehold =
    "PERSID,ORIGPURP1,DESTPURP1,STARTIME,ARRTIME,WDTRIPWGT\n"
    "Y12H0000104P01,At Home,Work Related,420,485,83.77\n"
    "Y12H0000104P01,Work Related,Go Home,990,1065,83.77\n"
    "Y12H0000104P02,At Home,Work Related,540,555,86.51\n"
    "Y12H0000104P02,Work Related,Buy Something,558,565,86.51\n"
    "Y12H0000104P02,Buy Something,Go Home,570,575,86.51\n"
    "Y12H0000104P02,At Home,Buy Something,900,905,86.51\n"
    "Y12H0000104P02,Buy Something,Go Home,910,915,86.51\n"
    "Y12H0000104P03,At Home,Work Related,450,480,131.96\n"
    "Y12H0000104P03,Work Related,Go Home,990,1020,131.96\n";

}  // namespace

namespace synthpop {
void PrintTo(const ActivityRecord& r, std::ostream* os) {
  *os << r.person_id << "/" << r.activity << "/" << r.start_minute << "-" << r.end_minute << "/"
      << r.weight;
}
}  // namespace synthpop

namespace {

TripTable parse(const std::string& text, DayFilter day = DayFilter::Weekday,
                Diagnostics* diag = nullptr) {
  std::istringstream in(text);
  return parse_trip_table(in, day, {}, diag);
}

}  // namespace

TEST(ActivityTable, ExampleHouseholdMatchesPublishedTable) {
  const std::vector<ActivityRecord> expected = {
      {"Y12H0000104P01", "At Home", 0, 420, 83.77},
      {"Y12H0000104P01", "Work Related", 485, 990, 83.77},
      {"Y12H0000104P01", "Go Home", 1065, 1439, 83.77},
      {"Y12H0000104P02", "At Home", 0, 540, 86.51},
      {"Y12H0000104P02", "Work Related", 555, 558, 86.51},
      {"Y12H0000104P02", "Buy Something", 565, 570, 86.51},
      {"Y12H0000104P02", "At Home", 575, 900, 86.51},
      {"Y12H0000104P02", "Buy Something", 905, 910, 86.51},
      {"Y12H0000104P02", "Go Home", 915, 1439, 86.51},
      {"Y12H0000104P03", "At Home", 0, 450, 131.96},
      {"Y12H0000104P03", "Work Related", 480, 990, 131.96},
      {"Y12H0000104P03", "Go Home", 1020, 1439, 131.96},
  };
  EXPECT_EQ(derive_activity_table(parse(kHousehold)), expected);
}

TEST(ActivityTable, FirstStartsAtMidnightAndLastEndsAtDayEnd) {
  const auto acts = derive_activity_table(parse(kHousehold));
  std::string prev;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    if (acts[i].person_id != prev) EXPECT_EQ(acts[i].start_minute, 0);
    if (i + 1 == acts.size() || acts[i + 1].person_id != acts[i].person_id) {
      EXPECT_EQ(acts[i].end_minute, kLastMinute);
    }
    EXPECT_LE(acts[i].start_minute, acts[i].end_minute);
    prev = acts[i].person_id;
  }
}

TEST(ActivityTable, OverlappingTripsSkipThePerson) {
  Diagnostics diag;
  const auto table = parse(
      "PERSID,ORIGPURP1,DESTPURP1,STARTIME,ARRTIME,WDTRIPWGT\n"
      "a,At Home,Work Related,500,560,1\n"
      "a,Work Related,Go Home,550,600,1\n"
      "b,At Home,Education,480,500,2\n"
      "b,Education,Go Home,900,930,2\n",
      DayFilter::Weekday, &diag);
  const auto acts = derive_activity_table(table, &diag);
  ASSERT_EQ(acts.size(), 3u);
  for (const auto& a : acts) EXPECT_EQ(a.person_id, "b");
  EXPECT_EQ(diag.get("ingest.persons_skipped_chronology"), 1);
}

TEST(TripTable, DayFilterDropsRowsWithoutThatWeight) {
  const std::string text =
      "PERSID,ORIGPURP1,DESTPURP1,STARTIME,ARRTIME,WDTRIPWGT,WEJTEWGT\n"
      "a,At Home,Work Related,500,560,10,\n"
      "b,At Home,Social,600,610,,20\n"
      "c,At Home,Social,600,610,0,5\n";
  const auto weekday = parse(text, DayFilter::Weekday);
  ASSERT_EQ(weekday.persons.size(), 1u);
  EXPECT_EQ(weekday.persons[0].person_id, "a");
  const auto weekend = parse(text, DayFilter::Weekend);
  ASSERT_EQ(weekend.persons.size(), 2u);
  EXPECT_DOUBLE_EQ(weekend.persons[1].trips[0].weight, 5.0);
}

TEST(TripTable, ErrorsNameColumnAndLine) {
  try {
    parse("PERSID,ORIGPURP1,DESTPURP1,STARTIME,WDTRIPWGT\na,b,c,1,1\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ARRTIME"), std::string::npos);
  }
  try {
    parse("PERSID,ORIGPURP1,DESTPURP1,STARTIME,ARRTIME,WDTRIPWGT\na,b,c,1,2,1\na,b,c,x,2,1\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos);
  }
  EXPECT_THROW(parse("PERSID,ORIGPURP1,DESTPURP1,STARTIME,ARRTIME,WDTRIPWGT\na,b,c,1,2,-4\n"),
               DataError);
}

TEST(Labels, RawSurveyLabelsCollapseOntoCanonicalSet) {
  EXPECT_EQ(simplify_label("At Home"), Activity::Home);
  EXPECT_EQ(simplify_label("Go Home"), Activity::Home);
  EXPECT_EQ(simplify_label("Unknown Purpose (at start of day)"), Activity::Home);
  EXPECT_EQ(simplify_label("Social"), Activity::SocialRecreational);
  EXPECT_EQ(simplify_label("Recreational"), Activity::SocialRecreational);
  EXPECT_EQ(simplify_label("Pick-up or Drop-off Someone"), Activity::PickupDropoffDeliver);
  EXPECT_EQ(simplify_label("Pick-up or Deliver Something"), Activity::PickupDropoffDeliver);
  EXPECT_EQ(simplify_label("Other Purpose"), Activity::Other);
  EXPECT_EQ(simplify_label("Not Stated"), Activity::Other);
  EXPECT_EQ(simplify_label("Personal Business"), Activity::Personal);
  EXPECT_EQ(simplify_label("Work Related"), Activity::Work);
  EXPECT_EQ(simplify_label("Education"), Activity::Study);
  EXPECT_EQ(simplify_label("Buy Something"), Activity::Shop);
  EXPECT_EQ(simplify_label("Change Mode"), Activity::ModeChange);
  EXPECT_EQ(simplify_label("Accompany Someone"), Activity::WithSomeone);
}

TEST(Labels, UnknownLabelsBecomeOtherAndAreCounted) {
  Diagnostics diag;
  EXPECT_EQ(simplify_label("Walk the dog", &diag), Activity::Other);
  EXPECT_EQ(diag.get("ingest.unknown_labels"), 1);
}

TEST(Labels, SimplifiedTableUsesOnlyCanonicalNames) {
  const auto acts = simplify_labels(derive_activity_table(parse(kHousehold)));
  for (const auto& a : acts) EXPECT_TRUE(parse_activity(a.activity).has_value()) << a.activity;
  EXPECT_EQ(acts[0].activity, "Home");
  EXPECT_EQ(acts[1].activity, "Work");
  EXPECT_EQ(acts[5].activity, "Shop");
}

TEST(SurveyTrips, LinkModesAndWeights) {
  EXPECT_EQ(reclassify_link_mode("Vehicle Driver"), Mode::Car);
  EXPECT_EQ(reclassify_link_mode("Tram"), Mode::Pt);
  EXPECT_EQ(reclassify_link_mode("Bicycle"), Mode::Cycle);
  EXPECT_EQ(reclassify_link_mode("Walking"), Mode::Walk);
  EXPECT_FALSE(reclassify_link_mode("Hovercraft").has_value());

  Diagnostics diag;
  const auto table = parse(
      "PERSID,ORIGPURP1,DESTPURP1,STARTIME,ARRTIME,WDTRIPWGT,CW_WDTRIPWGT_SA3,ORIGX,ORIGY,DESTX,"
      "DESTY,LINKMODE,AGE,SEX\n"
      "a,At Home,Buy Something,600,610,10,12.5,1,2,3,4,Train,34,F\n"
      "a,Buy Something,Go Home,700,710,10,,3,4,1,2,Walking,34,F\n"
      "b,At Home,Social,600,610,5,5,,,,,Walking,70,M\n",
      DayFilter::Weekday, &diag);
  const auto trips = extract_survey_trips(table, &diag);
  ASSERT_EQ(trips.size(), 2u);
  EXPECT_EQ(trips[0].mode, Mode::Pt);
  EXPECT_DOUBLE_EQ(trips[0].weight, 12.5);
  EXPECT_DOUBLE_EQ(trips[1].weight, 10.0);
  EXPECT_EQ(trips[0].dest_activity, Activity::Shop);
  EXPECT_EQ(diag.get("ingest.trips_without_location_or_mode"), 1);

  const auto persons = survey_persons(table);
  ASSERT_EQ(persons.size(), 2u);
  EXPECT_EQ(persons[1].gender, Gender::Male);
  EXPECT_EQ(persons[1].age, 70);
}

TEST(SurveyArtifacts, RoundTrip) {
  testing_util::TempDir dir("survey");
  const auto acts = simplify_labels(derive_activity_table(parse(kHousehold)));
  write_activity_table(dir / "a.csv", acts);
  EXPECT_EQ(read_activity_table(dir / "a.csv"), acts);

  std::vector<SurveyTrip> trips = {{"p", {1.5, 2.25}, {3, 4}, Mode::Car, 7.5, Activity::Work}};
  write_survey_trips(dir / "t.csv", trips);
  const auto back = read_survey_trips(dir / "t.csv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].origin, trips[0].origin);
  EXPECT_EQ(back[0].mode, Mode::Car);
  EXPECT_EQ(back[0].dest_activity, Activity::Work);
}
