#include "synthpop/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "synthpop/csv.hpp"
#include "synthpop/parallel.hpp"

namespace synthpop {
namespace {

constexpr std::size_t cat_index(Category c) { return static_cast<std::size_t>(index_of(c)); }
constexpr std::size_t mode_index(Mode m) { return static_cast<std::size_t>(index_of(m)); }

void normalise(std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total > 0.0) {
    for (double& x : v) x /= total;
  }
}

double band_gap(double d, double lo, double hi) {
  if (d < lo) return lo - d;
  if (d > hi) return d - hi;
  return 0.0;
}

}  // namespace

GlobalTallies::GlobalTallies(const RegionHierarchy& hierarchy) {
  for (auto& v : attraction_) v.assign(hierarchy.sa3_count(), 0.0);
  distance_.resize(hierarchy.sa3_count());
  distance_total_.assign(hierarchy.sa3_count(), {});
}

void GlobalTallies::add_destination(std::size_t sa3, Category c) {
  attraction_[cat_index(c)][sa3] += 1.0;
  attraction_total_[cat_index(c)] += 1.0;
}

void GlobalTallies::add_trip(std::size_t origin_sa3, Mode m, double distance) {
  auto& hist = distance_[origin_sa3][mode_index(m)];
  const auto bin = distance_bin(distance);
  if (hist.size() <= bin) hist.resize(bin + 1, 0.0);
  hist[bin] += 1.0;
  distance_total_[origin_sa3][mode_index(m)] += 1.0;
}

double GlobalTallies::attraction_share(Category c, std::size_t sa3) const {
  const double total = attraction_total_[cat_index(c)];
  return total > 0.0 ? attraction_[cat_index(c)][sa3] / total : 0.0;
}

double GlobalTallies::distance_share(std::size_t sa3, Mode m, std::size_t bin) const {
  const double total = distance_total_[sa3][mode_index(m)];
  const auto& hist = distance_[sa3][mode_index(m)];
  if (total <= 0.0 || bin >= hist.size()) return 0.0;
  return hist[bin] / total;
}

// ---------------------------------------------------------------------------

std::optional<Category> map_activity_to_location_type(Activity a, Rng& rng) {
  static constexpr std::array<Category, 4> kAny = {Category::Work, Category::Education,
                                                   Category::Commercial, Category::Park};
  switch (a) {
    case Activity::Home: return Category::Home;
    case Activity::Work: return Category::Work;
    case Activity::Study: return Category::Education;
    case Activity::Shop:
    case Activity::Personal: return Category::Commercial;
    case Activity::SocialRecreational:
      return rng.below(2) == 0 ? Category::Commercial : Category::Park;
    case Activity::Other:
    case Activity::PickupDropoffDeliver:
    case Activity::WithSomeone: return kAny[rng.below(kAny.size())];
    case Activity::ModeChange: break;
  }
  return std::nullopt;
}

std::vector<Mode> allowed_modes(std::optional<Mode> primary, bool anchored) {
  if (!primary) return {kAllModes.begin(), kAllModes.end()};
  std::vector<Mode> out;
  for (Mode m : kAllModes) {
    if (m == Mode::Walk || m == Mode::Pt || (m == *primary && is_vehicle(m) && !anchored)) {
      out.push_back(m);
    }
  }
  return out;
}

Mode get_mode(const SpatialModel& model, std::size_t region, std::optional<Mode> primary,
              bool anchored, Rng& rng, Diagnostics* diag) {
  const auto allowed = allowed_modes(primary, anchored);
  std::vector<double> w(allowed.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    total += w[i] = model.surfaces.mode[mode_index(allowed[i])][region];
  }
  if (total <= 0.0) {
    const auto sa3 = model.hierarchy.sa3_of(region);
    for (std::size_t r = 0; r < model.hierarchy.size(); ++r) {
      if (model.hierarchy.sa3_of(r) != sa3) continue;
      for (std::size_t i = 0; i < allowed.size(); ++i) {
        const double v = model.surfaces.mode[mode_index(allowed[i])][r];
        w[i] += v;
        total += v;
      }
    }
    if (total > 0.0) {
      note(diag, "assign.mode_sa3_fallback");
    } else {
      note(diag, "assign.mode_uniform_fallback");
      std::fill(w.begin(), w.end(), 1.0);
    }
  }
  return allowed[inverse_cdf(w, rng.uniform())];
}

std::vector<std::size_t> hop_filter(const SpatialModel& model, std::size_t current, Mode mode,
                                    int hops, std::size_t home, Diagnostics* diag) {
  const double limit = hops * model.distances.get(current, mode).p95();
  std::vector<std::size_t> out;
  std::optional<std::size_t> nearest;
  for (std::size_t r = 0; r < model.hierarchy.size(); ++r) {
    const double d = model.od.at(r, home);
    if (!std::isfinite(d)) continue;
    if (d <= limit) out.push_back(r);
    if (!nearest || d < model.od.at(*nearest, home)) nearest = r;
  }
  if (out.empty() && nearest) {
    note(diag, "assign.relaxed_hop_filter");
    out.push_back(*nearest);
  }
  return out;
}

RegionProbabilities region_probabilities(const SpatialModel& model, const GlobalTallies& tallies,
                                         std::size_t current, Category category, Mode mode,
                                         std::optional<HopConstraint> hop,
                                         const AssignmentOptions& options) {
  RegionProbabilities p;
  const auto& fit = model.distances.get(current, mode);
  const double lo = fit.p5();
  const double hi = fit.p95();
  const auto& attraction = model.surfaces.attraction[cat_index(category)];
  for (std::size_t r = 0; r < model.hierarchy.size(); ++r) {
    const double d = model.od.at(current, r);
    if (std::isfinite(d) && d >= lo && d <= hi && attraction[r] > 0.0) p.regions.push_back(r);
  }
  const std::size_t k = p.regions.size();
  p.local_distance.assign(k, 0.0);
  p.local_attraction.assign(k, 0.0);
  p.global_distance.assign(k, 0.0);
  p.global_attraction.assign(k, 0.0);
  p.within_hops.assign(k, 1);
  p.combined.assign(k, 0.0);
  if (k == 0) return p;

  std::map<std::size_t, std::size_t> per_bin;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = model.od.at(current, p.regions[i]);
    p.local_distance[i] = fit.pdf(d);
    ++per_bin[distance_bin(d)];
    p.local_attraction[i] = attraction[p.regions[i]];
  }
  normalise(p.local_distance);
  for (std::size_t i = 0; i < k; ++i) {
    p.local_distance[i] /= static_cast<double>(per_bin[distance_bin(model.od.at(current, p.regions[i]))]);
  }
  normalise(p.local_distance);
  normalise(p.local_attraction);

  const auto sa3 = model.hierarchy.sa3_of(current);
  const auto& target_hist = model.targets.distance[sa3][mode_index(mode)];
  for (std::size_t i = 0; i < k; ++i) {
    const auto bin = distance_bin(model.od.at(current, p.regions[i]));
    const double target = bin < target_hist.size() ? target_hist[bin] : 0.0;
    const double deficit = std::max(0.0, target - tallies.distance_share(sa3, mode, bin));
    p.global_distance[i] = deficit / static_cast<double>(per_bin[bin]);
  }
  normalise(p.global_distance);

  std::map<std::size_t, double> attraction_by_sa3;
  for (std::size_t i = 0; i < k; ++i) {
    attraction_by_sa3[model.hierarchy.sa3_of(p.regions[i])] += p.local_attraction[i];
  }
  const auto& target_share = model.targets.attraction[cat_index(category)];
  for (std::size_t i = 0; i < k; ++i) {
    const auto s = model.hierarchy.sa3_of(p.regions[i]);
    const double deficit =
        std::max(0.0, target_share[s] - tallies.attraction_share(category, s));
    p.global_attraction[i] = deficit * p.local_attraction[i] / attraction_by_sa3[s];
  }
  normalise(p.global_attraction);

  if (hop) {
    const double limit = hop->hops * fit.p95();
    for (std::size_t i = 0; i < k; ++i) {
      p.within_hops[i] = model.od.at(p.regions[i], hop->target) <= limit ? 1 : 0;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!p.within_hops[i]) continue;
    p.combined[i] = options.w_dist * (p.local_distance[i] + p.global_distance[i]) +
                    options.w_attr * (p.local_attraction[i] + p.global_attraction[i]);
  }
  normalise(p.combined);
  return p;
}

RegionChoice get_region(const SpatialModel& model, const GlobalTallies& tallies,
                        std::size_t current, Category category, Mode mode,
                        std::optional<HopConstraint> hop, const AssignmentOptions& options,
                        Rng& rng, Diagnostics* diag) {
  const auto p = region_probabilities(model, tallies, current, category, mode, hop, options);
  const auto& fit = model.distances.get(current, mode);
  auto hop_ok = [&](std::size_t r) {
    return !hop || model.od.at(r, hop->target) <= hop->hops * fit.p95();
  };
  auto hop_distance = [&](std::size_t r) {
    return hop ? model.od.at(r, hop->target) : 0.0;
  };

  if (!p.regions.empty()) {
    const std::size_t idx = inverse_cdf(p.combined, rng.uniform());
    if (idx < p.regions.size()) return {p.regions[idx], false, false};
    // Every candidate fails the hop filter: take the one closest to the target.
    note(diag, "assign.relaxed_hops");
    std::size_t best = p.regions.front();
    for (std::size_t r : p.regions) {
      if (hop_distance(r) < hop_distance(best)) best = r;
    }
    return {best, false, true};
  }

  // Nothing in the distance band: nearest-to-band region with attraction,
  // preferring those that satisfy the hop filter.
  note(diag, "assign.relaxed_band");
  const auto& attraction = model.surfaces.attraction[cat_index(category)];
  const double lo = fit.p5();
  const double hi = fit.p95();
  std::optional<std::size_t> best;
  bool best_hop = false;
  double best_gap = 0.0;
  for (std::size_t r = 0; r < model.hierarchy.size(); ++r) {
    const double d = model.od.at(current, r);
    if (!std::isfinite(d) || attraction[r] <= 0.0) continue;
    const bool ok = hop_ok(r);
    const double gap = band_gap(d, lo, hi);
    if (!best || (ok && !best_hop) || (ok == best_hop && gap < best_gap)) {
      best = r;
      best_hop = ok;
      best_gap = gap;
    }
  }
  if (!best) {
    note(diag, "assign.no_attraction");
    return {current, true, true};
  }
  if (!best_hop) note(diag, "assign.relaxed_hops");
  return {*best, true, !best_hop};
}

// ---------------------------------------------------------------------------

namespace {

struct Slot {
  Activity activity = Activity::Home;
  bool home = false;
  int real = -1;
  std::optional<Category> type;
  std::optional<std::size_t> region;
  std::optional<Mode> arriving;
  bool transfer = false;
  bool selected = false;
  bool relaxed = false;
  std::optional<HopConstraint> hop;
  std::optional<std::size_t> copy_from;
};

}  // namespace

AssignedPlan assign_plan(const SynPerson& person, const ActivityChain& chain,
                         const SpatialModel& model, const GlobalTallies& tallies,
                         const AssignmentOptions& options, Rng& rng, Diagnostics* diag) {
  if (chain.items.empty()) throw InvariantError(fmt::format("plan {} is empty", chain.plan_id));
  const auto home_region = model.hierarchy.find(person.sa1);
  if (!home_region) {
    throw DataError(fmt::format("person {} lives in unknown SA1 {}", person.agent_id, person.sa1));
  }

  // Chains that do not start or end at home get a virtual home item on that
  // side so every trip sits inside a home-to-home tour.
  auto virtual_home = [] {
    Slot slot;
    slot.home = true;
    return slot;
  };
  std::vector<Slot> s;
  if (chain.items.front().activity != Activity::Home) s.push_back(virtual_home());
  for (std::size_t k = 0; k < chain.items.size(); ++k) {
    Slot slot;
    slot.activity = chain.items[k].activity;
    slot.home = slot.activity == Activity::Home;
    slot.real = static_cast<int>(k);
    s.push_back(slot);
  }
  if (chain.items.back().activity != Activity::Home) s.push_back(virtual_home());
  for (auto& slot : s) {
    if (slot.home) {
      slot.type = Category::Home;
      slot.region = *home_region;
    } else if (slot.activity == Activity::ModeChange) {
      slot.transfer = true;
    } else {
      slot.type = map_activity_to_location_type(slot.activity, rng);
    }
  }

  const std::size_t n = s.size();
  auto home_count = [&](std::size_t i) {
    std::size_t j = i + 1;
    while (!s[j].home) ++j;
    return j - i;
  };

  bool anchor = false;
  std::optional<Mode> primary;

  auto choose = [&](std::size_t i, std::size_t j, Mode mode, int hops) {
    if (s[j].region) return;
    if (s[j].transfer) {
      s[j].region = s[i].region;
      s[j].type = s[i].type;
      s[j].copy_from = i;
      return;
    }
    const std::size_t h = i + home_count(i);
    std::optional<HopConstraint> hop;
    if (s[h].real >= 0) {
      hop = HopConstraint{std::max(hops, 1), anchor ? *s[h - 1].region : *home_region};
    }
    const auto choice =
        get_region(model, tallies, *s[i].region, *s[j].type, mode, hop, options, rng, diag);
    s[j].region = choice.region;
    s[j].selected = true;
    s[j].relaxed = choice.relaxed_band || choice.relaxed_hops;
    s[j].hop = hop;
  };

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t hc = home_count(i);
    if (s[i].home && !s[i + 1].home) {
      anchor = false;
      primary = get_mode(model, *s[i].region, std::nullopt, false, rng, diag);
      s[i + 1].arriving = primary;
      choose(i, i + 1, *primary, static_cast<int>(hc));
      s[i + hc].arriving = primary;
      continue;
    }
    if (s[i].home) continue;
    const bool walk_or_pt = *primary == Mode::Walk || *primary == Mode::Pt;
    if (hc > 2 || (hc == 2 && walk_or_pt)) {
      s[i + 1].arriving = get_mode(model, *s[i].region, primary, anchor, rng, diag);
      if (!anchor && is_vehicle(*primary) && s[i].arriving != s[i + 1].arriving) {
        // Vehicle parked here: the item before the next home returns to it.
        Slot& back = s[i + hc - 1];
        back.region = s[i].region;
        back.type = s[i].type;
        back.arriving = s[i + 1].arriving;
        back.copy_from = i;
        back.transfer = false;
        anchor = true;
      }
      if (*primary == Mode::Walk && s[i + 1].arriving == Mode::Pt) s[i + hc].arriving = Mode::Pt;
      choose(i, i + 1, *s[i + 1].arriving, static_cast<int>(anchor ? hc - 2 : hc - 1));
    }
    if (hc == 2 && is_vehicle(*primary) && !anchor) {
      s[i + 1].arriving = s[i].arriving;
      choose(i, i + 1, *primary, static_cast<int>(hc - 1));
    }
  }

  AssignedPlan plan;
  plan.agent_id = person.agent_id;
  plan.plan_id = chain.plan_id;
  plan.home_region = *home_region;
  plan.home = person.home;
  std::vector<std::size_t> real_of_slot(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Slot& slot = s[i];
    if (!slot.region || !slot.type || (i > 0 && !slot.arriving)) {
      throw InvariantError(fmt::format("plan {} item {} left unassigned", chain.plan_id, i));
    }
    if (slot.real < 0) continue;
    if (!plan.primary_mode && slot.arriving) plan.primary_mode = slot.arriving;
    real_of_slot[i] = plan.items.size();
    const auto& src = chain.items[static_cast<std::size_t>(slot.real)];
    AssignedItem item;
    item.activity = src.activity;
    item.start_bin = src.start_bin;
    item.end_bin = src.end_bin;
    item.region = *slot.region;
    item.location_type = *slot.type;
    item.selected = slot.selected;
    item.transfer = slot.transfer;
    item.relaxed = slot.relaxed;
    item.hop = slot.hop;
    if (!plan.items.empty()) {
      item.mode = slot.arriving;
      item.distance = model.od.at(plan.items.back().region, item.region);
    }
    if (slot.copy_from && s[*slot.copy_from].real >= 0) {
      item.copy_coord_from = real_of_slot[*slot.copy_from];
    }
    plan.items.push_back(item);
  }
  return plan;
}

void record_plan(const AssignedPlan& plan, const SpatialModel& model, GlobalTallies& tallies) {
  for (std::size_t k = 0; k < plan.items.size(); ++k) {
    const auto& item = plan.items[k];
    if (item.location_type != Category::Home && item.activity != Activity::ModeChange) {
      tallies.add_destination(model.hierarchy.sa3_of(item.region), item.location_type);
    }
    if (k == 0 || !item.mode) continue;
    const double d = item.distance;
    if (d > 0.0 && std::isfinite(d)) {
      tallies.add_trip(model.hierarchy.sa3_of(plan.items[k - 1].region), *item.mode, d);
    }
  }
}

void assign_coordinates(AssignedPlan& plan, const SpatialModel& model, Rng& rng,
                        Diagnostics* diag) {
  for (auto& item : plan.items) {
    if (item.activity == Activity::Home || item.location_type == Category::Home) {
      item.coord = plan.home;
      continue;
    }
    if (item.copy_coord_from) {
      item.coord = plan.items[*item.copy_coord_from].coord;
      continue;
    }
    const auto& idx = model.candidates_in(item.region, item.location_type);
    if (!idx.empty()) {
      std::vector<double> w;
      w.reserve(idx.size());
      for (std::size_t i : idx) w.push_back(model.candidates[i].address_weight);
      std::size_t pick = rng.weighted_index(w);
      if (pick >= idx.size()) pick = rng.below(idx.size());
      item.coord = model.candidates[idx[pick]].coord;
      continue;
    }
    // No candidate of this category in the SA1: nearest one in the same SA2,
    // then anywhere.
    note(diag, "assign.coordinates_outside_sa1");
    const auto& region = model.hierarchy[item.region];
    std::optional<std::size_t> best;
    bool best_same_sa2 = false;
    double best_d2 = 0.0;
    for (std::size_t i = 0; i < model.candidates.size(); ++i) {
      const auto& c = model.candidates[i];
      if (c.category != item.location_type) continue;
      const bool same = model.hierarchy[c.region].sa2 == region.sa2;
      const double d2 = squared_distance(c.coord, region.centroid);
      if (!best || (same && !best_same_sa2) || (same == best_same_sa2 && d2 < best_d2)) {
        best = i;
        best_same_sa2 = same;
        best_d2 = d2;
      }
    }
    item.coord = best ? model.candidates[*best].coord : region.centroid;
  }
}

TimeAssignment assign_times(const Chain& chain, int bins, Rng& rng) {
  if (bins <= 0 || kMinutesPerDay % bins != 0) {
    throw ConfigError(fmt::format("bin count {} does not divide a day", bins));
  }
  const int width = 86400 / bins;
  TimeAssignment t;
  for (const auto& item : chain) {
    for (int bin : {item.start_bin, item.end_bin}) {
      if (bin < 1 || bin > bins) throw InvariantError(fmt::format("bin {} out of range", bin));
      t.raw.push_back((bin - 1) * width +
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(width))));
    }
  }
  t.sorted = t.raw;
  std::sort(t.sorted.begin(), t.sorted.end());
  return t;
}

TimeAssignment assign_times(const AssignedPlan& plan, int bins, Rng& rng) {
  Chain chain;
  for (const auto& item : plan.items) chain.push_back({item.activity, item.start_bin, item.end_bin});
  return assign_times(chain, bins, rng);
}

std::string format_clock(int seconds) {
  return fmt::format("{:02}:{:02}:{:02}", seconds / 3600, (seconds / 60) % 60, seconds % 60);
}

std::vector<AssignedPlan> assign_population(std::span<const SynPerson> persons,
                                            std::span<const ActivityChain> plans,
                                            const SpatialModel& model,
                                            const AssignmentOptions& options, std::uint64_t seed,
                                            int bins, Diagnostics* diag) {
  std::map<int, const ActivityChain*> by_id;
  for (const auto& c : plans) by_id[c.plan_id] = &c;
  std::vector<const SynPerson*> order;
  for (const auto& p : persons) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const SynPerson* a, const SynPerson* b) { return a->agent_id < b->agent_id; });

  GlobalTallies tallies(model.hierarchy);
  std::vector<AssignedPlan> out;
  for (const SynPerson* p : order) {
    if (!p->plan_id) {
      note(diag, "assign.persons_without_plan");
      continue;
    }
    auto it = by_id.find(*p->plan_id);
    if (it == by_id.end()) {
      throw DataError(fmt::format("person {} refers to unknown plan {}", p->agent_id, *p->plan_id));
    }
    if (!model.hierarchy.find(p->sa1)) {
      warn(diag, "assign.persons_unknown_sa1",
           fmt::format("person {} lives in SA1 {} outside the study area", p->agent_id, p->sa1));
      continue;
    }
    Rng rng(derive_seed(seed, p->agent_id));
    out.push_back(assign_plan(*p, *it->second, model, tallies, options, rng, diag));
    record_plan(out.back(), model, tallies);
  }

  parallel_for(out.size(), [&](std::size_t i) {
    auto& plan = out[i];
    Rng place(derive_seed(derive_seed(seed, plan.agent_id), "place"));
    assign_coordinates(plan, model, place, diag);
    Rng clock(derive_seed(derive_seed(seed, plan.agent_id), "time"));
    const auto t = assign_times(plan, bins, clock);
    for (std::size_t k = 0; k < plan.items.size(); ++k) {
      plan.items[k].start_seconds = t.sorted[2 * k];
      plan.items[k].end_seconds = t.sorted[2 * k + 1];
    }
  });

  long trips = 0, relaxed = 0;
  for (const auto& plan : out) {
    for (const auto& item : plan.items) {
      if (item.selected) ++trips;
      if (item.relaxed) ++relaxed;
    }
  }
  note(diag, "assign.selected_trips", trips);
  note(diag, "assign.relaxed_selections", relaxed);
  return out;
}

void write_diary(const std::filesystem::path& path, std::span<const AssignedPlan> plans,
                 const RegionHierarchy& hierarchy) {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  w.row(std::vector<std::string>(kDiaryColumns.begin(), kDiaryColumns.end()));
  for (const auto& plan : plans) {
    for (std::size_t k = 0; k < plan.items.size(); ++k) {
      const auto& item = plan.items[k];
      const bool first = k == 0;
      w.row({std::to_string(plan.plan_id), std::string(to_string(item.activity)),
             std::to_string(item.start_bin), std::to_string(item.end_bin), plan.agent_id,
             hierarchy[item.region].sa1, std::string(to_string(item.location_type)),
             first ? std::string("NA") : std::string(to_string(*item.mode)),
             first ? std::string("NA") : fmt::format("{}", std::llround(item.distance)),
             csv::format_double(item.coord.x), csv::format_double(item.coord.y),
             format_clock(item.start_seconds), format_clock(item.end_seconds)});
    }
  }
  file.commit();
}

std::vector<DiaryRow> read_diary(const std::filesystem::path& path) {
  csv::Reader r(path);
  std::array<std::size_t, kDiaryColumns.size()> col{};
  for (std::size_t i = 0; i < kDiaryColumns.size(); ++i) col[i] = r.require(kDiaryColumns[i]);
  std::vector<DiaryRow> out;
  csv::Row row;
  auto fail = [&](const char* what) {
    return DataError(fmt::format("{}:{}: bad {}", r.source(), r.line_number(), what));
  };
  while (r.next(row)) {
    DiaryRow d;
    auto plan = csv::parse_int(row[col[0]]);
    auto act = parse_activity(row[col[1]]);
    auto sb = csv::parse_int(row[col[2]]);
    auto eb = csv::parse_int(row[col[3]]);
    auto type = parse_category(row[col[6]]);
    auto x = csv::parse_double(row[col[9]]);
    auto y = csv::parse_double(row[col[10]]);
    if (!plan || !act || !sb || !eb || !type || !x || !y) throw fail("row");
    d.plan_id = static_cast<int>(*plan);
    d.activity = *act;
    d.start_bin = static_cast<int>(*sb);
    d.end_bin = static_cast<int>(*eb);
    d.agent_id = row[col[4]];
    d.sa1 = row[col[5]];
    d.location_type = *type;
    if (row[col[7]] != "NA") {
      d.mode = parse_mode(row[col[7]]);
      if (!d.mode) throw fail("mode");
    }
    if (row[col[8]] != "NA") {
      d.distance = csv::parse_double(row[col[8]]);
      if (!d.distance) throw fail("distance");
    }
    d.coord = {*x, *y};
    d.start_time = row[col[11]];
    d.end_time = row[col[12]];
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace synthpop
