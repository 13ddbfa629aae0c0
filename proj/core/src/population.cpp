#include "synthpop/population.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "synthpop/csv.hpp"
#include "synthpop/rng.hpp"

namespace synthpop {
namespace {

bool name_contains(const std::filesystem::path& p, std::string_view needle) {
  return p.extension() == ".csv" && p.filename().string().find(needle) != std::string::npos;
}

}  // namespace

std::size_t CensusData::person_count() const {
  std::size_t n = 0;
  for (const auto& [sa2, persons] : persons_by_sa2) n += persons.size();
  return n;
}

CensusData read_census(const std::filesystem::path& dir, const CensusSchema& schema,
                       Diagnostics* diag) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("census directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> person_files;
  std::vector<std::filesystem::path> household_files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (name_contains(entry.path(), "households")) {
      household_files.push_back(entry.path());
    } else if (name_contains(entry.path(), "persons")) {
      person_files.push_back(entry.path());
    }
  }
  std::sort(person_files.begin(), person_files.end());
  std::sort(household_files.begin(), household_files.end());
  if (person_files.empty()) throw DataError("no persons CSV files in '" + dir.string() + "'");

  CensusData census;
  csv::Row row;
  for (const auto& path : household_files) {
    csv::Reader r(path);
    const auto c_id = r.require(schema.household_id);
    const auto c_sa1 = r.require(schema.household_sa1);
    const auto c_x = r.require(schema.address_x);
    const auto c_y = r.require(schema.address_y);
    while (r.next(row)) {
      auto x = csv::parse_double(row[c_x]);
      auto y = csv::parse_double(row[c_y]);
      if (!x || !y) {
        throw DataError(fmt::format("{}:{}: malformed address", r.source(), r.line_number()));
      }
      census.households[row[c_id]] = Household{row[c_id], row[c_sa1], {*x, *y}};
    }
  }
  for (const auto& path : person_files) {
    csv::Reader r(path);
    const auto c_id = r.require(schema.person_id);
    const auto c_hh = r.require(schema.person_household);
    const auto c_g = r.require(schema.gender);
    const auto c_age = r.require(schema.age);
    const auto c_sa2 = r.require(schema.sa2);
    std::size_t rows = 0;
    while (r.next(row)) {
      ++rows;
      auto g = parse_gender(row[c_g]);
      auto age = csv::parse_int(row[c_age]);
      if (!g || !age) {
        throw DataError(fmt::format("{}:{}: malformed person", r.source(), r.line_number()));
      }
      if (*age < 0) {
        throw DataError(fmt::format("{}:{}: negative age", r.source(), r.line_number()));
      }
      census.persons_by_sa2[row[c_sa2]].push_back(
          {row[c_id], row[c_hh], *g, static_cast<int>(*age), row[c_sa2]});
    }
    if (rows == 0) {
      warn(diag, "sample.empty_sa2_files", fmt::format("{} has no persons", path.string()));
    }
  }
  return census;
}

std::vector<SynPerson> sample_persons(const CensusData& census, double fraction,
                                      std::uint64_t seed, const CohortTable& cohorts,
                                      Diagnostics* diag) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError(fmt::format("sample fraction must lie in (0, 1], got {}", fraction));
  }
  std::vector<SynPerson> out;
  for (const auto& [sa2, persons] : census.persons_by_sa2) {
    if (persons.empty()) {
      warn(diag, "sample.empty_sa2", fmt::format("SA2 {} has no persons", sa2));
      continue;
    }
    // Sort by id so the draw does not depend on file row order.
    std::vector<const CensusPerson*> pool;
    pool.reserve(persons.size());
    for (const auto& p : persons) pool.push_back(&p);
    std::sort(pool.begin(), pool.end(),
              [](const CensusPerson* a, const CensusPerson* b) { return a->person_id < b->person_id; });

    const auto take = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(pool.size()) - 1e-9));
    Rng rng(derive_seed(seed, sa2));
    for (std::size_t idx : rng.sample_without_replacement(pool.size(), take)) {
      const CensusPerson& p = *pool[idx];
      auto hh = census.households.find(p.household_id);
      if (hh == census.households.end()) {
        warn(diag, "sample.persons_without_household",
             fmt::format("person {} has unknown household {}", p.person_id, p.household_id));
        continue;
      }
      SynPerson s;
      s.agent_id = p.person_id;
      s.gender = p.gender;
      s.age = p.age;
      s.sa2 = p.sa2;
      s.sa1 = hh->second.sa1;
      s.home = hh->second.address;
      s.cohort_id = cohorts.cohort_of(p.gender, p.age, diag);
      out.push_back(std::move(s));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SynPerson& a, const SynPerson& b) { return a.agent_id < b.agent_id; });
  return out;
}

std::map<int, std::size_t> cohort_counts(std::span<const SynPerson> persons) {
  std::map<int, std::size_t> counts;
  for (const auto& p : persons) ++counts[p.cohort_id];
  return counts;
}

void match_and_pair(std::vector<SynPerson>& persons, std::span<const ActivityChain> chains,
                    std::uint64_t seed, bool with_replacement) {
  std::map<int, std::vector<int>> pools;
  for (const auto& c : chains) pools[c.cohort_id].push_back(c.plan_id);

  std::map<int, std::vector<SynPerson*>> members;
  for (auto& p : persons) members[p.cohort_id].push_back(&p);

  for (auto& [cohort, people] : members) {
    const auto& pool = pools[cohort];
    if (pool.empty() || (!with_replacement && pool.size() < people.size())) {
      throw DataError(fmt::format(
          "cohort {} has {} persons but only {} chains; generate more chains for it", cohort,
          people.size(), pool.size()));
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cohort)));
    if (with_replacement) {
      for (SynPerson* p : people) p->plan_id = pool[rng.below(pool.size())];
    } else {
      const auto picks = rng.sample_without_replacement(pool.size(), people.size());
      for (std::size_t i = 0; i < people.size(); ++i) people[i]->plan_id = pool[picks[i]];
    }
  }
}

void write_persons(const std::filesystem::path& path, std::span<const SynPerson> persons) {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  w.row({"agent_id", "gender", "age", "sa2", "sa1", "home_x", "home_y", "cohort_id", "plan_id"});
  for (const auto& p : persons) {
    w.row({p.agent_id, std::string(to_string(p.gender)), std::to_string(p.age), p.sa2, p.sa1,
           csv::format_double(p.home.x), csv::format_double(p.home.y),
           std::to_string(p.cohort_id), p.plan_id ? std::to_string(*p.plan_id) : std::string()});
  }
  file.commit();
}

std::vector<SynPerson> read_persons(const std::filesystem::path& path) {
  csv::Reader r(path);
  const auto c_id = r.require("agent_id");
  const auto c_g = r.require("gender");
  const auto c_age = r.require("age");
  const auto c_sa2 = r.require("sa2");
  const auto c_sa1 = r.require("sa1");
  const auto c_x = r.require("home_x");
  const auto c_y = r.require("home_y");
  const auto c_cohort = r.require("cohort_id");
  const auto c_plan = r.require("plan_id");
  std::vector<SynPerson> out;
  csv::Row row;
  while (r.next(row)) {
    auto g = parse_gender(row[c_g]);
    auto age = csv::parse_int(row[c_age]);
    auto x = csv::parse_double(row[c_x]);
    auto y = csv::parse_double(row[c_y]);
    auto cohort = csv::parse_int(row[c_cohort]);
    if (!g || !age || !x || !y || !cohort) {
      throw DataError(fmt::format("{}:{}: malformed person row", r.source(), r.line_number()));
    }
    SynPerson p{row[c_id], *g, static_cast<int>(*age), row[c_sa2], row[c_sa1], {*x, *y},
                static_cast<int>(*cohort), std::nullopt};
    if (auto plan = csv::parse_int(row[c_plan])) p.plan_id = static_cast<int>(*plan);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace synthpop
