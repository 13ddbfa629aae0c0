#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "synthpop/population.hpp"

using namespace synthpop;

namespace {

// Two SA2s: 20101 with 7 persons, 20102 with 3.
CensusData small_census(const testing_util::TempDir& dir, bool drop_household = false) {
  std::string persons = "person_id,household_id,gender,age,sa2\n";
  std::string households = "household_id,sa1,address_x,address_y\n";
  for (int i = 0; i < 10; ++i) {
    const std::string sa2 = i < 7 ? "20101" : "20102";
    persons += "p" + std::to_string(i) + ",h" + std::to_string(i / 2) + "," +
               (i % 2 ? "M" : "F") + "," + std::to_string(5 + 9 * i) + "," + sa2 + "\n";
  }
  for (int h = 0; h < 5; ++h) {
    if (drop_household && h == 4) continue;
    households += "h" + std::to_string(h) + "," + (h < 4 ? "2010101" : "2010201") + "," +
                  std::to_string(100 * h) + ",5\n";
  }
  testing_util::write_text(dir / "census/persons.csv", persons);
  testing_util::write_text(dir / "census/households.csv", households);
  return read_census(dir / "census");
}

}  // namespace

TEST(Census, ReadsGroupedBySa2) {
  testing_util::TempDir dir("census");
  const auto census = small_census(dir);
  EXPECT_EQ(census.person_count(), 10u);
  EXPECT_EQ(census.persons_by_sa2.at("20101").size(), 7u);
  EXPECT_EQ(census.households.at("h2").sa1, "2010101");
  EXPECT_THROW(read_census(dir / "missing"), DataError);
}

TEST(Sample, TakesCeilingPerSa2WithoutDuplicates) {
  testing_util::TempDir dir("sample");
  const auto census = small_census(dir);
  for (double f : {0.1, 0.25, 0.5, 0.99, 1.0}) {
    const auto s = sample_persons(census, f, 11, CohortTable{});
    std::map<std::string, std::size_t> per_sa2;
    std::set<std::string> ids;
    for (const auto& p : s) {
      ++per_sa2[p.sa2];
      ids.insert(p.agent_id);
    }
    EXPECT_EQ(ids.size(), s.size());
    EXPECT_EQ(per_sa2["20101"], static_cast<std::size_t>(std::ceil(f * 7)));
    EXPECT_EQ(per_sa2["20102"], static_cast<std::size_t>(std::ceil(f * 3)));
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end(),
                               [](const auto& a, const auto& b) { return a.agent_id < b.agent_id; }));
  }
}

TEST(Sample, JoinsHouseholdAndIsDeterministic) {
  testing_util::TempDir dir("sample2");
  const auto census = small_census(dir);
  const auto a = sample_persons(census, 0.5, 3, CohortTable{});
  const auto b = sample_persons(census, 0.5, 3, CohortTable{});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].agent_id, b[i].agent_id);
  const auto full = sample_persons(census, 1.0, 3, CohortTable{});
  for (const auto& p : full) {
    const int idx = std::stoi(p.agent_id.substr(1));
    EXPECT_DOUBLE_EQ(p.home.x, 100.0 * (idx / 2));
    EXPECT_EQ(p.sa1, idx / 2 < 4 ? "2010101" : "2010201");
  }
}

TEST(Sample, MissingHouseholdIsSkippedAndCounted) {
  testing_util::TempDir dir("sample3");
  const auto census = small_census(dir, true);
  Diagnostics diag;
  const auto s = sample_persons(census, 1.0, 1, CohortTable{}, &diag);
  EXPECT_EQ(s.size(), 8u);
  EXPECT_EQ(diag.get("sample.persons_without_household"), 2);
}

TEST(Sample, RejectsBadFraction) {
  testing_util::TempDir dir("sample4");
  const auto census = small_census(dir);
  EXPECT_THROW(sample_persons(census, 0.0, 1, CohortTable{}), ConfigError);
  EXPECT_THROW(sample_persons(census, 1.5, 1, CohortTable{}), ConfigError);
}

TEST(Pairing, DrawsFromOwnCohortWithoutReplacement) {
  std::vector<SynPerson> persons;
  for (int i = 0; i < 6; ++i) {
    SynPerson p;
    p.agent_id = "a" + std::to_string(i);
    p.cohort_id = i % 2;
    persons.push_back(p);
  }
  std::vector<ActivityChain> chains;
  for (int i = 0; i < 8; ++i) chains.push_back({i + 1, i % 2, {{Activity::Home, 1, 48}}});
  match_and_pair(persons, chains, 5);
  std::set<int> used;
  for (const auto& p : persons) {
    ASSERT_TRUE(p.plan_id.has_value());
    EXPECT_EQ(chains[*p.plan_id - 1].cohort_id, p.cohort_id);
    used.insert(*p.plan_id);
  }
  EXPECT_EQ(used.size(), persons.size());
}

TEST(Pairing, SmallPoolIsAnActionableError) {
  std::vector<SynPerson> persons(3);
  for (std::size_t i = 0; i < persons.size(); ++i) {
    persons[i].agent_id = "a" + std::to_string(i);
    persons[i].cohort_id = 4;
  }
  std::vector<ActivityChain> chains = {{1, 4, {{Activity::Home, 1, 48}}}};
  try {
    match_and_pair(persons, chains, 1);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("cohort 4"), std::string::npos);
  }
  match_and_pair(persons, chains, 1, true);
  for (const auto& p : persons) EXPECT_EQ(p.plan_id, 1);
}

TEST(Persons, RoundTrip) {
  testing_util::TempDir dir("persons");
  SynPerson p;
  p.agent_id = "x1";
  p.gender = Gender::Male;
  p.age = 44;
  p.sa2 = "20101";
  p.sa1 = "2010101";
  p.home = {1.5, 2.5};
  p.cohort_id = 2;
  p.plan_id = 9;
  std::vector<SynPerson> v = {p};
  write_persons(dir / "p.csv", v);
  const auto back = read_persons(dir / "p.csv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].home, p.home);
  EXPECT_EQ(back[0].plan_id, 9);
  EXPECT_EQ(back[0].gender, Gender::Male);
}
