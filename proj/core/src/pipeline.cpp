#include "synthpop/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "synthpop/chains.hpp"
#include "synthpop/cohort.hpp"
#include "synthpop/csv.hpp"
#include "synthpop/parallel.hpp"
#include "synthpop/rng.hpp"

namespace synthpop {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const fs::path kActivities = "activities.csv";
const fs::path kSurveyPersons = "survey_persons.csv";
const fs::path kSurveyTrips = "survey_trips.csv";
const fs::path kCohorts = "cohorts.csv";
const fs::path kCohortRates = "cohort_rates.csv";
const fs::path kSampled = "sampled_persons.csv";
const fs::path kPlans = "plans.csv";
const fs::path kDistributions = "distributions.csv";
const fs::path kPersons = "persons.csv";
const fs::path kSpatial = "spatial";
const fs::path kDiary = "diary.csv";
const fs::path kReport = "report";

void require_artifact(const PipelineConfig& c, const fs::path& rel, Stage producer) {
  if (!fs::exists(c.output_dir / rel)) {
    throw ConfigError(fmt::format("missing {}: run stage '{}' first",
                                  (c.output_dir / rel).string(), to_string(producer)));
  }
}

void require_input(const fs::path& p, std::string_view what) {
  if (p.empty()) throw ConfigError(fmt::format("no {} configured", what));
  if (!fs::exists(p)) throw ConfigError(fmt::format("{} '{}' does not exist", what, p.string()));
}

// Per-cohort targets and chains plus the paired persons.
struct PlanResult {
  std::map<int, TimeDistributions> targets;
  std::vector<ActivityChain> chains;
  std::vector<SynPerson> persons;
};

PlanResult make_plans(const std::vector<ActivityRecord>& activities,
                      const std::vector<SurveyPerson>& survey, const CohortTable& table,
                      std::vector<SynPerson> persons, int bins, std::uint64_t seed,
                      bool with_replacement, Diagnostics* diag) {
  std::map<std::string, int> cohort_of;
  for (const auto& p : survey) cohort_of[p.person_id] = table.cohort_of(p.gender, p.age);
  std::map<int, std::vector<ActivityRecord>> by_cohort;
  for (const auto& a : activities) {
    auto it = cohort_of.find(a.person_id);
    if (it == cohort_of.end()) {
      note(diag, "plans.activities_without_cohort");
      continue;
    }
    by_cohort[it->second].push_back(a);
  }

  PlanResult out;
  const auto counts = cohort_counts(persons);
  std::optional<TimeDistributions> pooled;
  std::vector<std::pair<int, std::size_t>> jobs(counts.begin(), counts.end());
  std::vector<TimeDistributions> targets(jobs.size(), TimeDistributions(bins));
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const int cohort = jobs[j].first;
    auto it = by_cohort.find(cohort);
    if (it != by_cohort.end()) targets[j] = build_distribution_matrices(it->second, bins);
    if (targets[j].start.total() <= 0.0) {
      warn(diag, "plans.cohort_without_survey_activities",
           fmt::format("cohort {} has no survey activities; using pooled targets", cohort));
      if (!pooled) pooled = build_distribution_matrices(activities, bins);
      targets[j] = *pooled;
    }
  }
  // Cohorts are independent streams, so they generate in parallel.
  std::vector<GenerationResult> generated(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    generated[j] = generate_chains(targets[j], jobs[j].second,
                                   derive_seed(seed, static_cast<std::uint64_t>(jobs[j].first)));
  });
  int next_plan = 1;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    for (auto& chain : generated[j].chains) {
      out.chains.push_back({next_plan++, jobs[j].first, std::move(chain)});
    }
    out.targets.emplace(jobs[j].first, std::move(targets[j]));
  }
  match_and_pair(persons, out.chains, derive_seed(seed, "pair"), with_replacement);
  out.persons = std::move(persons);
  return out;
}

std::vector<Sa3Comparison> all_metrics(const Observations& expected, const Observations& actual,
                                       const RegionHierarchy& h, Diagnostics* diag) {
  std::vector<Sa3Comparison> out;
  for (Metric m : {Metric::AttractionShare, Metric::ModeShare, Metric::LogMean, Metric::LogSd}) {
    auto rows = compare_sa3(expected, actual, h, m, diag);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

void stage_ingest(const PipelineConfig& c, Diagnostics* diag) {
  require_input(c.trip_table, "trip table");
  const auto table = parse_trip_table(c.trip_table, c.day, c.trip_schema, diag);
  const auto activities = simplify_labels(derive_activity_table(table, diag), diag);
  write_activity_table(c.output_dir / kActivities, activities);
  write_survey_persons(c.output_dir / kSurveyPersons, survey_persons(table, diag));
  const auto trips = extract_survey_trips(table, diag);
  if (trips.empty()) {
    warn(diag, "ingest.no_located_trips", "trip table has no located, moded trips");
  }
  write_survey_trips(c.output_dir / kSurveyTrips, trips);
  spdlog::info("stage=ingest persons={} trips={} activities={}", table.persons.size(),
               table.trip_count(), activities.size());
}

void stage_cohorts(const PipelineConfig& c, Diagnostics* diag) {
  require_artifact(c, kActivities, Stage::Ingest);
  require_artifact(c, kSurveyPersons, Stage::Ingest);
  const auto activities = read_activity_table(c.output_dir / kActivities);
  const auto persons = read_survey_persons(c.output_dir / kSurveyPersons);
  const auto rates = build_cohort_rates(activities, persons, diag);
  ClusterOptions opts;
  opts.k_max = c.k_max;
  opts.references = c.gap_references;
  opts.seed = derive_seed(c.seed, "cohorts");
  opts.fixed_k = c.cohorts;
  const auto table = cluster_cohorts(rates, opts, diag);
  write_cohort_rates(c.output_dir / kCohortRates, rates);
  table.write(c.output_dir / kCohorts);
  spdlog::info("stage=cohorts cohorts={}", table.size());
}

void stage_sample(const PipelineConfig& c, Diagnostics* diag) {
  require_artifact(c, kCohorts, Stage::Cohorts);
  require_input(c.census_dir, "census directory");
  const auto census = read_census(c.census_dir, c.census_schema, diag);
  const auto table = CohortTable::read(c.output_dir / kCohorts);
  const auto persons =
      sample_persons(census, c.fraction, derive_seed(c.seed, "sample"), table, diag);
  write_persons(c.output_dir / kSampled, persons);
  spdlog::info("stage=sample census_persons={} sampled={}", census.person_count(),
               persons.size());
}

void stage_plans(const PipelineConfig& c, Diagnostics* diag) {
  require_artifact(c, kActivities, Stage::Ingest);
  require_artifact(c, kSurveyPersons, Stage::Ingest);
  require_artifact(c, kCohorts, Stage::Cohorts);
  require_artifact(c, kSampled, Stage::Sample);
  const auto result = make_plans(read_activity_table(c.output_dir / kActivities),
                                 read_survey_persons(c.output_dir / kSurveyPersons),
                                 CohortTable::read(c.output_dir / kCohorts),
                                 read_persons(c.output_dir / kSampled), c.bins,
                                 derive_seed(c.seed, "plans"), c.with_replacement, diag);
  write_distributions(c.output_dir / kDistributions, result.targets);
  write_plans(c.output_dir / kPlans, result.chains);
  write_persons(c.output_dir / kPersons, result.persons);
  spdlog::info("stage=plans chains={} persons={}", result.chains.size(), result.persons.size());
}

void stage_spatial(const PipelineConfig& c, Diagnostics* diag) {
  require_artifact(c, kSurveyTrips, Stage::Ingest);
  require_input(c.nodes, "network nodes file");
  require_input(c.edges, "network edges file");
  require_input(c.meshblocks, "meshblock file");
  if (c.addresses) require_input(*c.addresses, "address file");
  SpatialInputs in{c.nodes, c.edges, c.meshblocks, c.addresses, c.bandwidths, c.nearest_trips};
  const auto trips = read_survey_trips(c.output_dir / kSurveyTrips);
  const auto model = build_spatial_model(in, trips, diag);
  model.write(c.output_dir / kSpatial);
  spdlog::info("stage=spatial regions={} candidates={} survey_trips={}", model.hierarchy.size(),
               model.candidates.size(), model.survey_trips.size());
}

void stage_assign(const PipelineConfig& c, Diagnostics* diag) {
  require_artifact(c, kPersons, Stage::Plans);
  require_artifact(c, kPlans, Stage::Plans);
  require_artifact(c, kSpatial / "regions.csv", Stage::Spatial);
  const auto persons = read_persons(c.output_dir / kPersons);
  const auto chains = read_plans(c.output_dir / kPlans);
  const auto model = SpatialModel::read(c.output_dir / kSpatial);
  const auto plans = assign_population(persons, chains, model, c.weights,
                                       derive_seed(c.seed, "assign"), c.bins, diag);
  write_diary(c.output_dir / kDiary, plans, model.hierarchy);
  spdlog::info("stage=assign agents={}", plans.size());
}

void stage_validate(const PipelineConfig& c, Diagnostics* diag) {
  require_artifact(c, kDiary, Stage::Assign);
  require_artifact(c, kSpatial / "regions.csv", Stage::Spatial);
  const auto model = SpatialModel::read(c.output_dir / kSpatial);
  const auto rows = read_diary(c.output_dir / kDiary);
  const auto expected = observations_from_survey(model.survey_trips);
  const auto actual = observations_from_diary(rows, model.hierarchy, model.od, diag);
  write_report(c.output_dir / kReport, expected, actual, model.hierarchy, diag);
  const auto rows_err = error_table({{c.fraction, all_metrics(expected, actual, model.hierarchy,
                                                              nullptr)}});
  const std::vector<double> fractions{c.fraction};
  write_error_table(c.output_dir / kReport / "error_table.csv", fractions, rows_err);
  spdlog::info("stage=validate diary_rows={}", rows.size());
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError(fmt::format("fraction must lie in (0, 1], got {}", fraction));
  }
  if (bins <= 0 || kMinutesPerDay % bins != 0) {
    throw ConfigError(fmt::format("bins must divide 1440, got {}", bins));
  }
  if (cohorts && (*cohorts < 1 || *cohorts > static_cast<std::size_t>(kNumBands))) {
    throw ConfigError(fmt::format("cohort count must lie in [1, {}]", kNumBands));
  }
  for (double bw : {bandwidths.mode, bandwidths.work, bandwidths.park, bandwidths.education,
                    bandwidths.commercial}) {
    if (!(bw > 0.0)) throw ConfigError(fmt::format("bandwidths must be positive, got {}", bw));
  }
  if (weights.w_dist < 0.0 || weights.w_attr < 0.0 || weights.w_dist + weights.w_attr <= 0.0) {
    throw ConfigError("combination weights must be non-negative and not both zero");
  }
  if (nearest_trips == 0) throw ConfigError("nearest_trips must be positive");
  if (output_dir.empty()) throw ConfigError("output directory is empty");
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
  const fs::path base = path.parent_path();
  auto resolve = [&](const json& v) {
    fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : base / p;
  };

  PipelineConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "trip_table") c.trip_table = resolve(v);
      else if (key == "census_dir") c.census_dir = resolve(v);
      else if (key == "nodes") c.nodes = resolve(v);
      else if (key == "edges") c.edges = resolve(v);
      else if (key == "meshblocks") c.meshblocks = resolve(v);
      else if (key == "addresses") c.addresses = resolve(v);
      else if (key == "output_dir") c.output_dir = resolve(v);
      else if (key == "fraction") c.fraction = v.get<double>();
      else if (key == "bins") c.bins = v.get<int>();
      else if (key == "cohorts") c.cohorts = v.get<std::size_t>();
      else if (key == "k_max") c.k_max = v.get<std::size_t>();
      else if (key == "gap_references") c.gap_references = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "nearest_trips") c.nearest_trips = v.get<std::size_t>();
      else if (key == "with_replacement") c.with_replacement = v.get<bool>();
      else if (key == "w_dist") c.weights.w_dist = v.get<double>();
      else if (key == "w_attr") c.weights.w_attr = v.get<double>();
      else if (key == "day") {
        const auto d = v.get<std::string>();
        if (d == "weekday") c.day = DayFilter::Weekday;
        else if (d == "weekend") c.day = DayFilter::Weekend;
        else throw ConfigError("day must be 'weekday' or 'weekend'");
      } else if (key == "bandwidths") {
        for (const auto& [bk, bv] : v.items()) {
          const double x = bv.get<double>();
          if (bk == "mode") c.bandwidths.mode = x;
          else if (bk == "work") c.bandwidths.work = x;
          else if (bk == "park") c.bandwidths.park = x;
          else if (bk == "education") c.bandwidths.education = x;
          else if (bk == "commercial") c.bandwidths.commercial = x;
          else throw ConfigError(fmt::format("unknown bandwidth '{}'", bk));
        }
      } else if (key == "trip_columns") {
        auto& s = c.trip_schema;
        std::map<std::string, std::string*> fields{
            {"person_id", &s.person_id},       {"orig_purpose", &s.orig_purpose},
            {"dest_purpose", &s.dest_purpose}, {"start_time", &s.start_time},
            {"arrive_time", &s.arrive_time},   {"weekday_weight", &s.weekday_weight},
            {"weekend_weight", &s.weekend_weight}, {"survey_weight", &s.survey_weight},
            {"orig_x", &s.orig_x},             {"orig_y", &s.orig_y},
            {"dest_x", &s.dest_x},             {"dest_y", &s.dest_y},
            {"link_mode", &s.link_mode},       {"travel_day", &s.travel_day},
            {"age", &s.age},                   {"sex", &s.sex}};
        for (const auto& [ck, cv] : v.items()) {
          auto it = fields.find(ck);
          if (it == fields.end()) throw ConfigError(fmt::format("unknown trip column '{}'", ck));
          *it->second = cv.get<std::string>();
        }
      } else if (key == "census_columns") {
        auto& s = c.census_schema;
        std::map<std::string, std::string*> fields{
            {"person_id", &s.person_id},         {"person_household", &s.person_household},
            {"gender", &s.gender},               {"age", &s.age},
            {"sa2", &s.sa2},                     {"household_id", &s.household_id},
            {"household_sa1", &s.household_sa1}, {"address_x", &s.address_x},
            {"address_y", &s.address_y}};
        for (const auto& [ck, cv] : v.items()) {
          auto it = fields.find(ck);
          if (it == fields.end()) throw ConfigError(fmt::format("unknown census column '{}'", ck));
          *it->second = cv.get<std::string>();
        }
      } else {
        throw ConfigError(fmt::format("{}: unknown config key '{}'", path.string(), key));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return c;
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Cohorts: return "cohorts";
    case Stage::Sample: return "sample";
    case Stage::Plans: return "plans";
    case Stage::Spatial: return "spatial";
    case Stage::Assign: return "assign";
    case Stage::Validate: return "validate";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::set<Stage> parse_stages(std::string_view list) {
  std::set<Stage> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto end = list.find(',', pos);
    if (end == std::string_view::npos) end = list.size();
    const auto name = csv::trim(list.substr(pos, end - pos));
    if (name == "all") {
      out.insert(kAllStages.begin(), kAllStages.end());
    } else if (!name.empty()) {
      auto s = parse_stage(name);
      if (!s) throw ConfigError(fmt::format("unknown stage '{}'", name));
      out.insert(*s);
    }
    pos = end + 1;
  }
  if (out.empty()) throw ConfigError("no stages selected");
  return out;
}

std::vector<fs::path> stage_artifacts(Stage s) {
  switch (s) {
    case Stage::Ingest: return {kActivities, kSurveyPersons, kSurveyTrips};
    case Stage::Cohorts: return {kCohortRates, kCohorts};
    case Stage::Sample: return {kSampled};
    case Stage::Plans: return {kDistributions, kPlans, kPersons};
    case Stage::Spatial:
      return {kSpatial / "regions.csv", kSpatial / "od_matrix.bin", kSpatial / "candidates.csv",
              kSpatial / "surfaces.csv", kSpatial / "distmodels.csv",
              kSpatial / "survey_located.csv"};
    case Stage::Assign: return {kDiary};
    case Stage::Validate: {
      std::vector<fs::path> out;
      for (Mode m : kAllModes) {
        out.push_back(kReport / fmt::format("distance_hist_{}.csv", to_string(m)));
        out.push_back(kReport / fmt::format("sa3_distance_{}.csv", to_string(m)));
      }
      for (Category cat : kDestinationCategories) {
        out.push_back(kReport / fmt::format("sa3_attraction_{}.csv", to_string(cat)));
      }
      out.push_back(kReport / "sa3_mode.csv");
      out.push_back(kReport / "error_table.csv");
      return out;
    }
  }
  return {};
}

void run_stage(const PipelineConfig& config, Stage stage, Diagnostics* diag) {
  config.validate();
  fs::create_directories(config.output_dir);
  Diagnostics local;
  const auto t0 = std::chrono::steady_clock::now();
  spdlog::info("stage={} status=start", to_string(stage));
  try {
    switch (stage) {
      case Stage::Ingest: stage_ingest(config, &local); break;
      case Stage::Cohorts: stage_cohorts(config, &local); break;
      case Stage::Sample: stage_sample(config, &local); break;
      case Stage::Plans: stage_plans(config, &local); break;
      case Stage::Spatial: stage_spatial(config, &local); break;
      case Stage::Assign: stage_assign(config, &local); break;
      case Stage::Validate: stage_validate(config, &local); break;
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& rel : stage_artifacts(stage)) fs::remove(config.output_dir / rel, ec);
    spdlog::error("stage={} status=failed", to_string(stage));
    if (diag) diag->merge(local);
    throw;
  }
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  local.log_summary(to_string(stage));
  spdlog::info("stage={} status=done elapsed_ms={}", to_string(stage), ms);
  if (diag) diag->merge(local);
}

void run_pipeline(const PipelineConfig& config, const std::set<Stage>& stages, Diagnostics* diag) {
  config.validate();
  for (Stage s : kAllStages) {
    if (stages.count(s)) run_stage(config, s, diag);
  }
}

std::vector<ErrorRow> sample_size_study(const PipelineConfig& config,
                                        const std::vector<double>& fractions,
                                        std::size_t repeats, Diagnostics* diag) {
  config.validate();
  if (fractions.empty()) throw ConfigError("no sample fractions given");
  if (repeats == 0) throw ConfigError("repeat count must be positive");
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError(fmt::format("fraction {} outside (0, 1]", f));
  }
  require_artifact(config, kActivities, Stage::Ingest);
  require_artifact(config, kCohorts, Stage::Cohorts);
  require_artifact(config, kSpatial / "regions.csv", Stage::Spatial);
  const auto activities = read_activity_table(config.output_dir / kActivities);
  const auto survey = read_survey_persons(config.output_dir / kSurveyPersons);
  const auto table = CohortTable::read(config.output_dir / kCohorts);
  const auto model = SpatialModel::read(config.output_dir / kSpatial);
  const auto census = read_census(config.census_dir, config.census_schema, diag);
  const auto expected = observations_from_survey(model.survey_trips);

  std::vector<std::pair<double, std::vector<Sa3Comparison>>> by_fraction;
  for (double f : fractions) {
    std::vector<Sa3Comparison> rows;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto seed = derive_seed(config.seed, fmt::format("study/{}", r));
      auto persons = sample_persons(census, f, derive_seed(seed, "sample"), table, diag);
      auto planned = make_plans(activities, survey, table, std::move(persons), config.bins,
                                derive_seed(seed, "plans"), config.with_replacement, diag);
      const auto plans = assign_population(planned.persons, planned.chains, model,
                                           config.weights, derive_seed(seed, "assign"),
                                           config.bins, diag);
      const auto actual = observations_from_plans(plans, model.od);
      auto cmp = all_metrics(expected, actual, model.hierarchy, nullptr);
      rows.insert(rows.end(), cmp.begin(), cmp.end());
    }
    spdlog::info("stage=validate fraction={} comparisons={}", f, rows.size());
    by_fraction.emplace_back(f, std::move(rows));
  }
  return error_table(by_fraction);
}

std::vector<CalibrationRow> calibrate_bandwidths(const PipelineConfig& config,
                                                 const std::vector<double>& mode_bandwidths,
                                                 const std::vector<double>& attraction_bandwidths,
                                                 Diagnostics* diag) {
  require_artifact(config, kSpatial / "regions.csv", Stage::Spatial);
  const auto model = SpatialModel::read(config.output_dir / kSpatial);
  const auto& h = model.hierarchy;
  const std::size_t n3 = h.sa3_count();
  std::vector<CalibrationRow> out;

  // Survey mode shares by origin SA3 and destination shares by SA3.
  std::vector<std::array<double, kNumModes>> mode_expected(n3, {0, 0, 0, 0});
  std::array<std::vector<double>, kNumCategories> attr_expected;
  for (auto& v : attr_expected) v.assign(n3, 0.0);
  for (const auto& t : model.survey_trips) {
    mode_expected[h.sa3_of(t.orig_region)][static_cast<std::size_t>(index_of(t.mode))] += t.weight;
    for (Category c : attraction_categories(t.dest_activity)) {
      attr_expected[static_cast<std::size_t>(index_of(c))][h.sa3_of(t.dest_region)] += t.weight;
    }
  }

  for (double bw : mode_bandwidths) {
    const auto surfaces =
        mode_surfaces(model.survey_trips, model.candidates, h.size(), h, bw, diag);
    std::vector<std::array<double, kNumModes>> actual(n3, {0, 0, 0, 0});
    std::vector<double> members(n3, 0.0);
    for (std::size_t r = 0; r < h.size(); ++r) {
      members[h.sa3_of(r)] += 1.0;
      for (std::size_t m = 0; m < kNumModes; ++m) actual[h.sa3_of(r)][m] += surfaces[m][r];
    }
    double err = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < n3; ++s) {
      double te = 0.0;
      for (double x : mode_expected[s]) te += x;
      if (te <= 0.0 || members[s] <= 0.0) continue;
      for (std::size_t m = 0; m < kNumModes; ++m) {
        err += std::abs(mode_expected[s][m] / te - actual[s][m] / members[s]);
        ++n;
      }
    }
    out.push_back({"mode", "all", bw, n > 0 ? err / static_cast<double>(n) : 0.0});
  }

  for (Category c : kDestinationCategories) {
    const auto ci = static_cast<std::size_t>(index_of(c));
    double te = 0.0;
    for (double x : attr_expected[ci]) te += x;
    for (double bw : attraction_bandwidths) {
      const auto surface =
          attraction_surface(model.survey_trips, model.candidates, h.size(), c, bw, diag);
      std::vector<double> actual(n3, 0.0);
      for (std::size_t r = 0; r < h.size(); ++r) actual[h.sa3_of(r)] += surface[r];
      double err = 0.0;
      for (std::size_t s = 0; s < n3; ++s) {
        err += std::abs((te > 0.0 ? attr_expected[ci][s] / te : 0.0) - actual[s]);
      }
      out.push_back({"attraction", std::string(to_string(c)), bw,
                     n3 > 0 ? err / static_cast<double>(n3) : 0.0});
    }
  }
  return out;
}

void write_calibration(const fs::path& path, std::span<const CalibrationRow> rows) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  w.row({"kind", "category", "bandwidth", "mean_abs_error"});
  for (const auto& r : rows) {
    w.row({r.kind, r.category, csv::format_double(r.bandwidth),
           csv::format_double(r.mean_abs_error)});
  }
  file.commit();
}

std::string artifact_schemas() {
  return R"(activities.csv        person_id, activity, start_minute, end_minute, weight
survey_persons.csv    person_id, gender, age
survey_trips.csv      person_id, orig_x, orig_y, dest_x, dest_y, mode, weight, dest_activity
cohort_rates.csv      gender, age_lo, age_hi, <activity share columns>
cohorts.csv           cohort_id, gender, age_lo, age_hi
sampled_persons.csv   agent_id, gender, age, sa2, sa1, home_x, home_y, cohort_id, plan_id
distributions.csv     cohort_id, kind, start_bin, activity, bin, value
plans.csv             plan_id, cohort_id, seq, activity, start_bin, end_bin
persons.csv           agent_id, gender, age, sa2, sa1, home_x, home_y, cohort_id, plan_id
spatial/regions.csv   sa1, sa2, sa3, centroid_x, centroid_y, node_id, node_x, node_y
spatial/od_matrix.bin "SPOD", uint32 version=1, uint64 n, n*n float64 row-major (little-endian,
                      rows and columns in regions.csv order, +inf when unreachable)
spatial/candidates.csv node_id, x, y, category, sa1, address_weight
spatial/surfaces.csv  kind (mode|attraction), category, sa1, probability, bandwidth
spatial/distmodels.csv sa1, mode, log_mean, log_sd, trips
spatial/survey_located.csv orig_sa1, dest_sa1, orig_x, orig_y, dest_x, dest_y, mode, weight,
                      dest_activity, distance
diary.csv             PlanId, Activity, StartBin, EndBin, AgentId, SA1, LocationType, Mode,
                      Distance, X, Y, StartTime, EndTime
report/distance_hist_<mode>.csv   bin_start_m, bin_end_m, expected_share, actual_share
report/sa3_distance_<mode>.csv    sa3, expected_log_mean, actual_log_mean, expected_log_sd, actual_log_sd
report/sa3_attraction_<category>.csv sa3, expected, actual
report/sa3_mode.csv   sa3, mode, expected, actual
report/error_table.csv metric, key, fraction_<f>...
report/calibration.csv kind, category, bandwidth, mean_abs_error
)";
}

}  // namespace synthpop
