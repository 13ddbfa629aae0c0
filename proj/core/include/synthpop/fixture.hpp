#pragma once

#include <cstdint>
#include <filesystem>

namespace synthpop {

/// Synthetic 12 km x 12 km city: 24x24 meshblocks of 500 m, 1 km SA1s,
/// 2 km SA2s and 4 km SA3s, a 250 m street grid and a travel survey with
/// raw survey labels.
struct FixtureOptions {
  std::size_t census_persons = 200;
  std::size_t survey_persons = 1500;
  std::uint64_t seed = 7;
};

struct FixturePaths {
  std::filesystem::path root;
  std::filesystem::path trips;
  std::filesystem::path census_dir;
  std::filesystem::path nodes;
  std::filesystem::path edges;
  std::filesystem::path meshblocks;
  std::filesystem::path addresses;
  std::filesystem::path config;
};

/// Writes every fixture input plus a config.json with relative paths and
/// output_dir "out". Output is a pure function of the options.
FixturePaths write_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

}  // namespace synthpop
