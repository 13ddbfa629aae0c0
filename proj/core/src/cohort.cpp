#include "synthpop/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "synthpop/csv.hpp"
#include "synthpop/rng.hpp"

namespace synthpop {
namespace {

std::array<DemographicBand, kNumBands> make_bands() {
  std::array<DemographicBand, kNumBands> bands{};
  for (int g = 0; g < 2; ++g) {
    const Gender gender = g == 0 ? Gender::Female : Gender::Male;
    int i = g * kBandsPerGender;
    bands[i++] = {gender, 0, 14};
    for (int lo = 15; lo < 65; lo += 5) bands[i++] = {gender, lo, lo + 4};
    bands[i++] = {gender, 65, kMaxAge};
  }
  return bands;
}

double safe_log(double w) { return std::log(std::max(w, 1e-300)); }

}  // namespace

const std::array<DemographicBand, kNumBands>& demographic_bands() {
  static const auto bands = make_bands();
  return bands;
}

int band_index(Gender gender, int age, Diagnostics* diag) {
  if (age < 0) throw DataError(fmt::format("negative age {}", age));
  if (age > kMaxAge) {
    note(diag, "cohorts.ages_clamped");
    age = kMaxAge;
  }
  const int base = gender == Gender::Female ? 0 : kBandsPerGender;
  if (age <= 14) return base;
  if (age >= 65) return base + kBandsPerGender - 1;
  return base + 1 + (age - 15) / 5;
}

RateMatrix build_cohort_rates(std::span<const ActivityRecord> activities,
                              std::span<const SurveyPerson> persons, Diagnostics* diag) {
  std::unordered_map<std::string, int> band_of;
  for (const auto& p : persons) band_of[p.person_id] = band_index(p.gender, p.age, diag);

  RateMatrix rates{};
  std::array<double, kNumBands> totals{};
  for (const auto& a : activities) {
    auto it = band_of.find(a.person_id);
    if (it == band_of.end()) {
      note(diag, "cohorts.activities_without_person");
      continue;
    }
    const int band = it->second;
    totals[band] += a.weight;
    const auto activity = parse_activity(a.activity);
    if (!activity) {
      throw DataError(fmt::format("activity '{}' is not canonical; run label simplification",
                                  a.activity));
    }
    for (std::size_t c = 0; c < kRateActivities.size(); ++c) {
      if (*activity == kRateActivities[c]) rates[band][c] += a.weight;
    }
  }
  for (int b = 0; b < kNumBands; ++b) {
    if (totals[b] <= 0.0) {
      const auto& band = demographic_bands()[b];
      warn(diag, "cohorts.empty_bands",
           fmt::format("band {} {}-{} has no activity weight", to_string(band.gender),
                       band.age_lo, band.age_hi));
      rates[b].fill(0.0);
      continue;
    }
    for (double& v : rates[b]) v /= totals[b];
  }
  return rates;
}

std::vector<Merge> ward_linkage(const Points& points) {
  const std::size_t n = points.size();
  std::vector<Merge> merges;
  if (n < 2) return merges;

  // Squared Euclidean distances, updated with the Lance-Williams Ward rule.
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < points[i].size(); ++c) {
        const double diff = points[i][c] - points[j][c];
        s += diff * diff;
      }
      d[i * n + j] = d[j * n + i] = s;
    }
  }
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = 0;
    std::size_t bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (d[i * n + j] < best) {
          best = d[i * n + j];
          bi = i;
          bj = j;
        }
      }
    }
    merges.push_back({bi, bj, best});
    const double ni = static_cast<double>(size[bi]);
    const double nj = static_cast<double>(size[bj]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double nk = static_cast<double>(size[k]);
      const double updated =
          ((ni + nk) * d[k * n + bi] + (nj + nk) * d[k * n + bj] - nk * d[bi * n + bj]) /
          (ni + nj + nk);
      d[k * n + bi] = d[bi * n + k] = updated;
    }
    size[bi] += size[bj];
    active[bj] = false;
  }
  return merges;
}

std::vector<int> cut_tree(std::span<const Merge> merges, std::size_t n, std::size_t k) {
  if (k == 0 || k > n) throw ConfigError(fmt::format("cannot cut {} rows into {} clusters", n, k));
  std::vector<std::size_t> root(n);
  std::iota(root.begin(), root.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  const std::size_t steps = n - k;
  for (std::size_t s = 0; s < steps && s < merges.size(); ++s) {
    root[find(merges[s].right)] = find(merges[s].left);
  }
  std::vector<int> labels(n, -1);
  std::unordered_map<std::size_t, int> label_of_root;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] =
        label_of_root.try_emplace(find(i), static_cast<int>(label_of_root.size()));
    labels[i] = it->second;
  }
  return labels;
}

double within_cluster_dispersion(const Points& points, std::span<const int> labels) {
  if (points.empty()) return 0.0;
  const std::size_t dim = points.front().size();
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<double>> centroid(k, std::vector<double>(dim, 0.0));
  std::vector<double> count(k, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    count[labels[i]] += 1.0;
    for (std::size_t c = 0; c < dim; ++c) centroid[labels[i]][c] += points[i][c];
  }
  for (int l = 0; l < k; ++l) {
    for (double& v : centroid[l]) v /= std::max(count[l], 1.0);
  }
  double w = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t c = 0; c < dim; ++c) {
      const double diff = points[i][c] - centroid[labels[i]][c];
      w += diff * diff;
    }
  }
  return w;
}

GapResult gap_statistic(const Points& points, std::size_t k_max, std::size_t references,
                        std::uint64_t seed) {
  const std::size_t n = points.size();
  if (k_max < 1) throw ConfigError("k_max must be at least 1");
  if (k_max > n) throw ConfigError(fmt::format("k_max {} exceeds {} rows", k_max, n));
  if (references < 1) throw ConfigError("gap statistic needs at least one reference set");

  GapResult result;
  result.gap.assign(k_max, 0.0);
  result.s.assign(k_max, 0.0);

  const auto merges = ward_linkage(points);
  std::vector<double> log_w(k_max);
  for (std::size_t k = 1; k <= k_max; ++k) {
    log_w[k - 1] = safe_log(within_cluster_dispersion(points, cut_tree(merges, n, k)));
  }
  if (within_cluster_dispersion(points, cut_tree(merges, n, 1)) == 0.0) {
    result.k = 1;  // no dispersion at all
    return result;
  }

  const std::size_t dim = points.front().size();
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto& p : points) {
    for (std::size_t c = 0; c < dim; ++c) {
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }

  Rng rng(seed);
  std::vector<std::vector<double>> ref_log_w(k_max, std::vector<double>(references));
  Points reference(n, std::vector<double>(dim));
  for (std::size_t b = 0; b < references; ++b) {
    for (auto& p : reference) {
      for (std::size_t c = 0; c < dim; ++c) p[c] = lo[c] + rng.uniform() * (hi[c] - lo[c]);
    }
    const auto ref_merges = ward_linkage(reference);
    for (std::size_t k = 1; k <= k_max; ++k) {
      ref_log_w[k - 1][b] =
          safe_log(within_cluster_dispersion(reference, cut_tree(ref_merges, n, k)));
    }
  }
  const double bf = static_cast<double>(references);
  for (std::size_t k = 0; k < k_max; ++k) {
    const double mean = std::accumulate(ref_log_w[k].begin(), ref_log_w[k].end(), 0.0) / bf;
    double var = 0.0;
    for (double v : ref_log_w[k]) var += (v - mean) * (v - mean);
    var /= bf;
    result.gap[k] = mean - log_w[k];
    result.s[k] = std::sqrt(var) * std::sqrt(1.0 + 1.0 / bf);
  }
  result.k = k_max;
  for (std::size_t k = 1; k < k_max; ++k) {
    if (result.gap[k - 1] >= result.gap[k] - result.s[k]) {
      result.k = k;
      break;
    }
  }
  return result;
}

CohortTable::CohortTable() { band_to_cohort_.fill(0); }

CohortTable::CohortTable(std::array<int, kNumBands> band_to_cohort)
    : band_to_cohort_(band_to_cohort) {
  for (int c : band_to_cohort_) {
    if (c < 0) throw DataError("negative cohort id");
  }
}

int CohortTable::cohort_of(Gender gender, int age, Diagnostics* diag) const {
  return band_to_cohort_[band_index(gender, age, diag)];
}

std::size_t CohortTable::size() const {
  return static_cast<std::size_t>(
             *std::max_element(band_to_cohort_.begin(), band_to_cohort_.end())) +
         1;
}

std::vector<Cohort> CohortTable::cohorts() const {
  std::vector<Cohort> out(size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c].id = static_cast<int>(c);
  for (int b = 0; b < kNumBands; ++b) {
    out[band_to_cohort_[b]].members.push_back(demographic_bands()[b]);
  }
  return out;
}

void CohortTable::write(const std::filesystem::path& path) const {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  w.row({"cohort_id", "gender", "age_lo", "age_hi"});
  for (int b = 0; b < kNumBands; ++b) {
    const auto& band = demographic_bands()[b];
    w.row({std::to_string(band_to_cohort_[b]), std::string(to_string(band.gender)),
           std::to_string(band.age_lo), std::to_string(band.age_hi)});
  }
  file.commit();
}

CohortTable CohortTable::read(const std::filesystem::path& path) {
  csv::Reader r(path);
  const auto c_id = r.require("cohort_id");
  const auto c_g = r.require("gender");
  const auto c_lo = r.require("age_lo");
  const auto c_hi = r.require("age_hi");
  std::array<int, kNumBands> mapping{};
  std::array<bool, kNumBands> seen{};
  csv::Row row;
  while (r.next(row)) {
    auto id = csv::parse_int(row[c_id]);
    auto g = parse_gender(row[c_g]);
    auto lo = csv::parse_int(row[c_lo]);
    auto hi = csv::parse_int(row[c_hi]);
    if (!id || !g || !lo || !hi) {
      throw DataError(fmt::format("{}:{}: malformed cohort row", r.source(), r.line_number()));
    }
    const int band = band_index(*g, static_cast<int>(*lo));
    if (demographic_bands()[band].age_hi != *hi) {
      throw DataError(fmt::format("{}:{}: age band {}-{} does not match the standard bands",
                                  r.source(), r.line_number(), *lo, *hi));
    }
    mapping[band] = static_cast<int>(*id);
    seen[band] = true;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool s) { return s; })) {
    throw DataError(r.source() + ": cohort table does not cover all 24 bands");
  }
  return CohortTable(mapping);
}

CohortTable cluster_cohorts(const RateMatrix& rates, const ClusterOptions& options,
                            Diagnostics* diag) {
  if (options.k_max < 1 || options.k_max > static_cast<std::size_t>(kNumBands)) {
    throw ConfigError(fmt::format("k_max must lie in [1, {}], got {}", kNumBands, options.k_max));
  }
  Points points;
  for (const auto& row : rates) {
    for (double v : row) {
      if (!std::isfinite(v)) throw DataError("cohort rates must be finite");
    }
    points.emplace_back(row.begin(), row.end());
  }
  std::size_t k = 0;
  if (options.fixed_k) {
    k = *options.fixed_k;
    if (k < 1 || k > static_cast<std::size_t>(kNumBands)) {
      throw ConfigError(fmt::format("cohort count must lie in [1, {}], got {}", kNumBands, k));
    }
  } else {
    k = gap_statistic(points, options.k_max, options.references, options.seed).k;
  }
  note(diag, "cohorts.count", static_cast<long>(k));
  const auto labels = cut_tree(ward_linkage(points), points.size(), k);
  std::array<int, kNumBands> mapping{};
  std::copy(labels.begin(), labels.end(), mapping.begin());
  return CohortTable(mapping);
}

void write_cohort_rates(const std::filesystem::path& path, const RateMatrix& rates) {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  std::vector<std::string> header = {"gender", "age_lo", "age_hi"};
  for (Activity a : kRateActivities) header.emplace_back(to_string(a));
  w.row(header);
  for (int b = 0; b < kNumBands; ++b) {
    const auto& band = demographic_bands()[b];
    std::vector<std::string> row = {std::string(to_string(band.gender)),
                                    std::to_string(band.age_lo), std::to_string(band.age_hi)};
    for (double v : rates[b]) row.push_back(csv::format_double(v));
    w.row(row);
  }
  file.commit();
}

}  // namespace synthpop
