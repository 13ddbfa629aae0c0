#include "synthpop/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "synthpop/csv.hpp"

namespace synthpop {
namespace {

struct Moments {
  double w = 0.0;
  double wl = 0.0;
  double wll = 0.0;
  double mean() const { return wl / w; }
  double sd() const { return std::sqrt(std::max(0.0, wll / w - mean() * mean())); }
};

// Weighted log-distance moments per (sa3, mode) over trips with distance > 0.
std::vector<std::array<std::vector<double>, kNumModes>> log_distances(
    const Observations& obs, const RegionHierarchy& h, std::vector<std::array<std::vector<double>, kNumModes>>& weights) {
  std::vector<std::array<std::vector<double>, kNumModes>> out(h.sa3_count());
  weights.assign(h.sa3_count(), {});
  for (const auto& t : obs.trips) {
    if (!(t.distance > 0.0) || !std::isfinite(t.distance)) continue;
    const auto s = h.sa3_of(t.origin);
    const auto m = static_cast<std::size_t>(index_of(t.mode));
    out[s][m].push_back(std::log(t.distance));
    weights[s][m].push_back(t.weight);
  }
  return out;
}

std::optional<std::pair<double, double>> weighted_mean_sd(const std::vector<double>& x,
                                                          const std::vector<double>& w) {
  double sw = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
  }
  if (!(sw > 0.0)) return std::nullopt;
  const double mean = sx / sw;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += w[i] * (x[i] - mean) * (x[i] - mean);
  return std::pair{mean, std::sqrt(ss / sw)};
}

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::LogMean: return "log_mean";
    case Metric::LogSd: return "log_sd";
    case Metric::AttractionShare: return "attraction_share";
    case Metric::ModeShare: return "mode_share";
  }
  return "?";
}

Observations observations_from_survey(std::span<const LocatedTrip> trips) {
  Observations o;
  for (const auto& t : trips) {
    o.trips.push_back({t.orig_region, t.dest_region, t.mode, t.weight, t.distance});
    for (Category c : attraction_categories(t.dest_activity)) {
      o.destinations.push_back({t.dest_region, c, t.weight});
    }
  }
  return o;
}

Observations observations_from_diary(std::span<const DiaryRow> rows, const RegionHierarchy& hierarchy,
                                     const ODMatrix& od, Diagnostics* diag) {
  Observations o;
  const DiaryRow* prev = nullptr;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t prev_region = kNone;
  for (const auto& row : rows) {
    if (prev == nullptr || prev->agent_id != row.agent_id) prev_region = kNone;
    const auto region = hierarchy.find(row.sa1);
    if (!region) note(diag, "validate.diary_rows_outside_area");
    if (region && prev_region != kNone && row.mode) {
      o.trips.push_back({prev_region, *region, *row.mode, 1.0, od.at(prev_region, *region)});
    }
    if (region && row.location_type != Category::Home && row.activity != Activity::ModeChange) {
      o.destinations.push_back({*region, row.location_type, 1.0});
    }
    prev = &row;
    prev_region = region.value_or(kNone);
  }
  return o;
}

Observations observations_from_plans(std::span<const AssignedPlan> plans, const ODMatrix& od) {
  Observations o;
  for (const auto& plan : plans) {
    for (std::size_t k = 0; k < plan.items.size(); ++k) {
      const auto& item = plan.items[k];
      if (k > 0 && item.mode) {
        const auto from = plan.items[k - 1].region;
        o.trips.push_back({from, item.region, *item.mode, 1.0, od.at(from, item.region)});
      }
      if (item.location_type != Category::Home && item.activity != Activity::ModeChange) {
        o.destinations.push_back({item.region, item.location_type, 1.0});
      }
    }
  }
  return o;
}

std::vector<Sa3Comparison> compare_sa3(const Observations& expected, const Observations& actual,
                                       const RegionHierarchy& h, Metric metric,
                                       Diagnostics* diag) {
  std::vector<Sa3Comparison> out;
  const std::size_t n3 = h.sa3_count();
  switch (metric) {
    case Metric::ModeShare: {
      auto shares = [&](const Observations& o) {
        std::vector<std::array<double, kNumModes>> s(n3, {0, 0, 0, 0});
        for (const auto& t : o.trips) {
          s[h.sa3_of(t.origin)][static_cast<std::size_t>(index_of(t.mode))] += t.weight;
        }
        return s;
      };
      const auto e = shares(expected);
      const auto a = shares(actual);
      for (std::size_t s = 0; s < n3; ++s) {
        double te = 0.0, ta = 0.0;
        for (std::size_t m = 0; m < kNumModes; ++m) {
          te += e[s][m];
          ta += a[s][m];
        }
        if (te <= 0.0 || ta <= 0.0) {
          note(diag, "validate.sa3_without_trips");
          continue;
        }
        for (Mode m : kAllModes) {
          const auto mi = static_cast<std::size_t>(index_of(m));
          out.push_back({h.sa3_code(s), metric, std::string(to_string(m)), e[s][mi] / te,
                         a[s][mi] / ta});
        }
      }
      break;
    }
    case Metric::AttractionShare: {
      auto shares = [&](const Observations& o) {
        std::array<std::vector<double>, kNumCategories> s;
        for (auto& v : s) v.assign(n3, 0.0);
        for (const auto& d : o.destinations) {
          s[static_cast<std::size_t>(index_of(d.category))][h.sa3_of(d.region)] += d.weight;
        }
        return s;
      };
      const auto e = shares(expected);
      const auto a = shares(actual);
      for (Category c : kDestinationCategories) {
        const auto ci = static_cast<std::size_t>(index_of(c));
        double te = 0.0, ta = 0.0;
        for (std::size_t s = 0; s < n3; ++s) {
          te += e[ci][s];
          ta += a[ci][s];
        }
        if (te <= 0.0 || ta <= 0.0) {
          note(diag, "validate.category_without_destinations");
          continue;
        }
        for (std::size_t s = 0; s < n3; ++s) {
          out.push_back({h.sa3_code(s), metric, std::string(to_string(c)), e[ci][s] / te,
                         a[ci][s] / ta});
        }
      }
      break;
    }
    case Metric::LogMean:
    case Metric::LogSd: {
      std::vector<std::array<std::vector<double>, kNumModes>> we, wa;
      const auto le = log_distances(expected, h, we);
      const auto la = log_distances(actual, h, wa);
      for (std::size_t s = 0; s < n3; ++s) {
        for (Mode m : kAllModes) {
          const auto mi = static_cast<std::size_t>(index_of(m));
          const auto fe = weighted_mean_sd(le[s][mi], we[s][mi]);
          const auto fa = weighted_mean_sd(la[s][mi], wa[s][mi]);
          if (!fe || !fa) {
            note(diag, "validate.sa3_mode_without_trips");
            continue;
          }
          const bool mean = metric == Metric::LogMean;
          out.push_back({h.sa3_code(s), metric, std::string(to_string(m)),
                         mean ? fe->first : fe->second, mean ? fa->first : fa->second});
        }
      }
      break;
    }
  }
  return out;
}

std::vector<ErrorRow> error_table(
    const std::vector<std::pair<double, std::vector<Sa3Comparison>>>& by_fraction) {
  std::map<std::pair<int, std::string>, std::vector<std::pair<double, std::size_t>>> acc;
  const std::size_t nf = by_fraction.size();
  for (std::size_t f = 0; f < nf; ++f) {
    for (const auto& c : by_fraction[f].second) {
      auto& cell = acc[{static_cast<int>(c.metric), c.key}];
      cell.resize(nf, {0.0, 0});
      cell[f].first += c.abs_diff();
      ++cell[f].second;
    }
  }
  std::vector<ErrorRow> rows;
  for (const auto& [key, cells] : acc) {
    ErrorRow row{static_cast<Metric>(key.first), key.second, {}};
    for (const auto& [sum, n] : cells) {
      row.mean_abs_diff.push_back(n > 0 ? sum / static_cast<double>(n) : std::nan(""));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_error_table(const std::filesystem::path& path, std::span<const double> fractions,
                       std::span<const ErrorRow> rows) {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  std::vector<std::string> header{"metric", "key"};
  for (double f : fractions) header.push_back(fmt::format("fraction_{}", csv::format_double(f)));
  w.row(header);
  for (const auto& r : rows) {
    std::vector<std::string> fields{std::string(to_string(r.metric)), r.key};
    for (double v : r.mean_abs_diff) fields.push_back(csv::format_double(v));
    w.row(fields);
  }
  file.commit();
}

std::vector<double> distance_histogram(const Observations& obs, Mode mode) {
  std::vector<double> hist;
  double total = 0.0;
  for (const auto& t : obs.trips) {
    if (t.mode != mode || !(t.distance > 0.0) || !std::isfinite(t.distance)) continue;
    const auto bin = distance_bin(t.distance);
    if (hist.size() <= bin) hist.resize(bin + 1, 0.0);
    hist[bin] += t.weight;
    total += t.weight;
  }
  if (total > 0.0) {
    for (double& v : hist) v /= total;
  }
  return hist;
}

void write_report(const std::filesystem::path& dir, const Observations& expected,
                  const Observations& actual, const RegionHierarchy& hierarchy,
                  Diagnostics* diag) {
  std::filesystem::create_directories(dir);
  for (Mode m : kAllModes) {
    const auto e = distance_histogram(expected, m);
    const auto a = distance_histogram(actual, m);
    csv::AtomicFile file(dir / fmt::format("distance_hist_{}.csv", to_string(m)));
    csv::Writer w(file.stream());
    w.row({"bin_start_m", "bin_end_m", "expected_share", "actual_share"});
    for (std::size_t b = 0; b < std::max(e.size(), a.size()); ++b) {
      w.row({csv::format_double(static_cast<double>(b) * kDistanceBin),
             csv::format_double(static_cast<double>(b + 1) * kDistanceBin),
             csv::format_double(b < e.size() ? e[b] : 0.0),
             csv::format_double(b < a.size() ? a[b] : 0.0)});
    }
    file.commit();
  }

  const auto means = compare_sa3(expected, actual, hierarchy, Metric::LogMean, diag);
  const auto sds = compare_sa3(expected, actual, hierarchy, Metric::LogSd, nullptr);
  for (Mode m : kAllModes) {
    csv::AtomicFile file(dir / fmt::format("sa3_distance_{}.csv", to_string(m)));
    csv::Writer w(file.stream());
    w.row({"sa3", "expected_log_mean", "actual_log_mean", "expected_log_sd", "actual_log_sd"});
    for (std::size_t i = 0; i < means.size(); ++i) {
      if (means[i].key != to_string(m)) continue;
      w.row({means[i].sa3, csv::format_double(means[i].expected),
             csv::format_double(means[i].actual), csv::format_double(sds[i].expected),
             csv::format_double(sds[i].actual)});
    }
    file.commit();
  }

  const auto attraction = compare_sa3(expected, actual, hierarchy, Metric::AttractionShare, diag);
  for (Category c : kDestinationCategories) {
    csv::AtomicFile file(dir / fmt::format("sa3_attraction_{}.csv", to_string(c)));
    csv::Writer w(file.stream());
    w.row({"sa3", "expected", "actual"});
    for (const auto& row : attraction) {
      if (row.key != to_string(c)) continue;
      w.row({row.sa3, csv::format_double(row.expected), csv::format_double(row.actual)});
    }
    file.commit();
  }

  const auto modes = compare_sa3(expected, actual, hierarchy, Metric::ModeShare, diag);
  csv::AtomicFile file(dir / "sa3_mode.csv");
  csv::Writer w(file.stream());
  w.row({"sa3", "mode", "expected", "actual"});
  for (const auto& row : modes) {
    w.row({row.sa3, row.key, csv::format_double(row.expected), csv::format_double(row.actual)});
  }
  file.commit();
}

}  // namespace synthpop
