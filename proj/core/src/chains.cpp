#include "synthpop/chains.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "synthpop/csv.hpp"
#include "synthpop/rng.hpp"

namespace synthpop {
namespace {

// Floor given to cells the target allows but the correction matrix has
// driven to zero, so over-represented activities stay reachable.
constexpr double kSelectionFloor = 0.001;

void check_bins(int bins) {
  if (bins < 1 || kMinutesPerDay % bins != 0) {
    throw ConfigError(fmt::format("bin count {} must be positive and divide 1440", bins));
  }
}

Activity canonical(const std::string& label) {
  auto a = parse_activity(label);
  if (!a) {
    throw DataError(
        fmt::format("activity '{}' is not canonical; run label simplification first", label));
  }
  return *a;
}

}  // namespace

int bin_index(int minute, int bins) {
  check_bins(bins);
  if (minute < 0 || minute >= kMinutesPerDay) {
    throw ConfigError(fmt::format("minute {} outside 0..1439", minute));
  }
  return minute / (kMinutesPerDay / bins) + 1;
}

DistributionMatrix::DistributionMatrix(int bins)
    : bins_(bins), cells_(static_cast<std::size_t>(kNumActivities) * bins, 0.0) {
  if (bins < 1) throw ConfigError("distribution matrix needs at least one bin");
}

double DistributionMatrix::total() const {
  double s = 0.0;
  for (double v : cells_) s += v;
  return s;
}

double DistributionMatrix::bin_total(int bin) const {
  double s = 0.0;
  for (Activity a : kAllActivities) s += at(a, bin);
  return s;
}

double DistributionMatrix::activity_total(Activity a) const {
  double s = 0.0;
  for (int b = 1; b <= bins_; ++b) s += at(a, b);
  return s;
}

TimeDistributions::TimeDistributions(int bins)
    : start(bins), end_by_start(static_cast<std::size_t>(bins), DistributionMatrix(bins)) {}

TimeDistributions build_distribution_matrices(std::span<const ActivityRecord> activities,
                                              int bins) {
  check_bins(bins);
  TimeDistributions d(bins);
  for (const auto& rec : activities) {
    const Activity a = canonical(rec.activity);
    const int bs = bin_index(rec.start_minute, bins);
    const int be = bin_index(rec.end_minute, bins);
    d.start.at(a, bs) += rec.weight;
    d.end(bs).at(a, be) += rec.weight;
  }
  return d;
}

Chain collapse_chain(Chain items) {
  Chain out;
  out.reserve(items.size());
  for (const auto& item : items) {
    if (!out.empty() && out.back().activity == item.activity) {
      out.back().end_bin = item.end_bin;
    } else {
      out.push_back(item);
    }
  }
  return out;
}

bool is_valid_chain(const Chain& chain, int bins) {
  if (chain.empty()) return false;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const auto& item = chain[k];
    if (item.start_bin < 1 || item.end_bin > bins || item.start_bin > item.end_bin) return false;
    if (k > 0) {
      if (item.start_bin < chain[k - 1].end_bin) return false;
      if (item.activity == chain[k - 1].activity) return false;
    }
  }
  return true;
}

GenerationResult generate_chains(const TimeDistributions& targets, std::size_t count,
                                 std::uint64_t seed) {
  const DistributionMatrix& target = targets.start;
  const int bins = target.bins();
  const double target_total = target.total();
  if (!(target_total > 0.0)) {
    throw DataError("start-time distribution is all zero; cannot generate chains");
  }

  Rng rng(seed);
  GenerationResult result{{}, DistributionMatrix(bins)};
  DistributionMatrix& achieved = result.achieved_start;
  result.chains.reserve(count);

  std::vector<double> delta(static_cast<std::size_t>(kNumActivities) * bins, 0.0);
  auto cell = [&](int a, int b) -> double& {
    return delta[static_cast<std::size_t>(a) * bins + static_cast<std::size_t>(b - 1)];
  };
  std::vector<double> column(kNumActivities);
  std::vector<double> gamma;
  gamma.reserve(static_cast<std::size_t>(bins));

  for (std::size_t n = 0; n < count; ++n) {
    const double achieved_total = achieved.total();

    // Difference between target and achieved shares, shifted so each row is
    // non-negative, masked to the target's support and scaled into [0, 1].
    for (int a = 0; a < kNumActivities; ++a) {
      const Activity act = static_cast<Activity>(a);
      double row_min = 0.0;
      for (int b = 1; b <= bins; ++b) {
        const double achieved_share =
            achieved_total > 0.0 ? achieved.at(act, b) / achieved_total : 0.0;
        cell(a, b) = target.at(act, b) / target_total - achieved_share;
        row_min = std::min(row_min, cell(a, b));
      }
      double row_max = 0.0;
      for (int b = 1; b <= bins; ++b) {
        double& v = cell(a, b);
        v -= row_min;
        if (target.at(act, b) == 0.0) v = 0.0;
        row_max = std::max(row_max, v);
      }
      if (row_max > 0.0) {
        for (int b = 1; b <= bins; ++b) cell(a, b) /= row_max;
      }
    }

    Chain chain;
    int b = 1;
    bool zero_length_here = false;
    while (b < bins) {
      const double wanted = target.bin_total(b) / target_total;
      const double have = achieved_total > 0.0 ? achieved.bin_total(b) / achieved_total : 0.0;
      if (have >= wanted) {
        ++b;
        zero_length_here = false;
        continue;
      }
      double column_sum = 0.0;
      for (int a = 0; a < kNumActivities; ++a) {
        double v = cell(a, b);
        if (v == 0.0 && target.at(static_cast<Activity>(a), b) > 0.0) v = kSelectionFloor;
        column[a] = v;
        column_sum += v;
      }
      if (column_sum <= 0.0) {
        ++b;
        zero_length_here = false;
        continue;
      }
      const auto a = static_cast<Activity>(rng.weighted_index(column));

      // End bin from the remaining bins of the day, given activity and start.
      const DistributionMatrix& ends = targets.end(b);
      gamma.assign(static_cast<std::size_t>(bins - b + 1), 0.0);
      double gamma_sum = 0.0;
      for (int e = b; e <= bins; ++e) {
        gamma[static_cast<std::size_t>(e - b)] = ends.at(a, e);
        gamma_sum += ends.at(a, e);
      }
      if (gamma_sum <= 0.0) std::fill(gamma.begin(), gamma.end(), 1.0);
      const int e = b + static_cast<int>(rng.weighted_index(gamma));

      chain.push_back({a, b, e});
      if (e > b) {
        b = e;
        zero_length_here = false;
      } else if (zero_length_here) {
        // A second zero-length activity in the same bin: move on so the walk
        // always terminates.
        ++b;
        zero_length_here = false;
      } else {
        zero_length_here = true;
      }
    }
    if (chain.empty()) chain.push_back({Activity::Home, 1, bins});
    chain = collapse_chain(std::move(chain));
    for (const auto& item : chain) achieved.at(item.activity, item.start_bin) += 1.0;
    result.chains.push_back(std::move(chain));
  }
  return result;
}

double start_distribution_l1(const DistributionMatrix& target,
                             const DistributionMatrix& achieved) {
  if (target.bins() != achieved.bins()) throw ConfigError("bin counts differ");
  const double tt = target.total();
  const double at = achieved.total();
  double l1 = 0.0;
  for (std::size_t i = 0; i < target.cells().size(); ++i) {
    const double p = tt > 0.0 ? target.cells()[i] / tt : 0.0;
    const double q = at > 0.0 ? achieved.cells()[i] / at : 0.0;
    l1 += std::abs(p - q);
  }
  return l1;
}

void write_plans(const std::filesystem::path& path, std::span<const ActivityChain> chains) {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  w.row({"plan_id", "cohort_id", "seq", "activity", "start_bin", "end_bin"});
  for (const auto& c : chains) {
    for (std::size_t k = 0; k < c.items.size(); ++k) {
      const auto& it = c.items[k];
      w.row({std::to_string(c.plan_id), std::to_string(c.cohort_id), std::to_string(k + 1),
             std::string(to_string(it.activity)), std::to_string(it.start_bin),
             std::to_string(it.end_bin)});
    }
  }
  file.commit();
}

std::vector<ActivityChain> read_plans(const std::filesystem::path& path) {
  csv::Reader r(path);
  const auto c_plan = r.require("plan_id");
  const auto c_cohort = r.require("cohort_id");
  const auto c_seq = r.require("seq");
  const auto c_act = r.require("activity");
  const auto c_s = r.require("start_bin");
  const auto c_e = r.require("end_bin");
  std::vector<ActivityChain> out;
  csv::Row row;
  while (r.next(row)) {
    auto plan = csv::parse_int(row[c_plan]);
    auto cohort = csv::parse_int(row[c_cohort]);
    auto seq = csv::parse_int(row[c_seq]);
    auto act = parse_activity(row[c_act]);
    auto s = csv::parse_int(row[c_s]);
    auto e = csv::parse_int(row[c_e]);
    if (!plan || !cohort || !seq || !act || !s || !e) {
      throw DataError(fmt::format("{}:{}: malformed plan row", r.source(), r.line_number()));
    }
    if (out.empty() || out.back().plan_id != *plan) {
      out.push_back({static_cast<int>(*plan), static_cast<int>(*cohort), {}});
    }
    if (static_cast<std::size_t>(*seq) != out.back().items.size() + 1) {
      throw DataError(fmt::format("{}:{}: plan {} items out of sequence", r.source(),
                                  r.line_number(), *plan));
    }
    out.back().items.push_back({*act, static_cast<int>(*s), static_cast<int>(*e)});
  }
  return out;
}

void write_distributions(const std::filesystem::path& path,
                         const std::map<int, TimeDistributions>& by_cohort) {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  w.row({"cohort_id", "kind", "start_bin", "activity", "bin", "value"});
  auto dump = [&](int cohort, std::string_view kind, int start_bin, const DistributionMatrix& m) {
    for (Activity a : kAllActivities) {
      for (int b = 1; b <= m.bins(); ++b) {
        if (m.at(a, b) == 0.0) continue;
        w.row({std::to_string(cohort), std::string(kind), std::to_string(start_bin),
               std::string(to_string(a)), std::to_string(b), csv::format_double(m.at(a, b))});
      }
    }
  };
  for (const auto& [cohort, d] : by_cohort) {
    dump(cohort, "start", 0, d.start);
    for (int bs = 1; bs <= d.bins(); ++bs) dump(cohort, "end", bs, d.end(bs));
  }
  file.commit();
}

}  // namespace synthpop
