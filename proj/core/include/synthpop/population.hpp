#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "synthpop/chains.hpp"
#include "synthpop/cohort.hpp"
#include "synthpop/common.hpp"
#include "synthpop/geometry.hpp"

namespace synthpop {

/// Column names of the census-like persons and households files.
struct CensusSchema {
  std::string person_id = "person_id";
  std::string person_household = "household_id";
  std::string gender = "gender";
  std::string age = "age";
  std::string sa2 = "sa2";
  std::string household_id = "household_id";
  std::string household_sa1 = "sa1";
  std::string address_x = "address_x";
  std::string address_y = "address_y";
};

struct CensusPerson {
  std::string person_id;
  std::string household_id;
  Gender gender = Gender::Female;
  int age = 0;
  std::string sa2;
};

struct Household {
  std::string id;
  std::string sa1;
  Point address;
};

struct CensusData {
  std::map<std::string, std::vector<CensusPerson>> persons_by_sa2;
  std::unordered_map<std::string, Household> households;
  std::size_t person_count() const;
};

/// Reads every `*persons*.csv` and `*households*.csv` under `dir`. Persons
/// are grouped by their SA2 column, so one file per SA2 or one combined file
/// both work.
CensusData read_census(const std::filesystem::path& dir, const CensusSchema& schema = {},
                       Diagnostics* diag = nullptr);

struct SynPerson {
  std::string agent_id;
  Gender gender = Gender::Female;
  int age = 0;
  std::string sa2;
  std::string sa1;
  Point home;
  int cohort_id = 0;
  std::optional<int> plan_id;
};

/// Draws ceil(fraction * n) persons uniformly without replacement from each
/// SA2, joins their household address and assigns the cohort. Each SA2 uses a
/// seed derived from (seed, sa2 code); output is sorted by agent id.
std::vector<SynPerson> sample_persons(const CensusData& census, double fraction,
                                      std::uint64_t seed, const CohortTable& cohorts,
                                      Diagnostics* diag = nullptr);

/// Number of persons per cohort id.
std::map<int, std::size_t> cohort_counts(std::span<const SynPerson> persons);

/// Gives every person a chain from their own cohort's pool, drawn uniformly
/// without replacement (or with, if requested). Throws DataError when a pool
/// is too small.
void match_and_pair(std::vector<SynPerson>& persons, std::span<const ActivityChain> chains,
                    std::uint64_t seed, bool with_replacement = false);

void write_persons(const std::filesystem::path& path, std::span<const SynPerson> persons);
std::vector<SynPerson> read_persons(const std::filesystem::path& path);

}  // namespace synthpop
