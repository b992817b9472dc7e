#include "mgcp/event_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mgcp/csv.hpp"
#include "mgcp/errors.hpp"

namespace mgcp {

void validate(const ObservationWindow &window) {
  if (!std::isfinite(window.start) || !std::isfinite(window.end) ||
      !(window.start < window.end)) {
    throw ValidationError("observation window must satisfy start < end, got [" +
                          format_double(window.start) + ", " +
                          format_double(window.end) + "]");
  }
}

EventDataset::EventDataset(std::vector<UnitRecord> units,
                           ObservationWindow window)
    : units_(std::move(units)), window_(window) {
  validate(window_);
  if (units_.empty()) throw ValidationError("no units");
  std::unordered_set<std::string> seen;
  for (const auto &u : units_) {
    if (u.unit_id.empty()) throw ValidationError("empty unit id");
    if (!seen.insert(u.unit_id).second)
      throw ValidationError("duplicate unit id '" + u.unit_id + "'");
    if (!std::is_sorted(u.event_times.begin(), u.event_times.end()))
      throw ValidationError("event times of unit '" + u.unit_id +
                            "' are not sorted");
    for (double t : u.event_times) {
      if (!window_.contains(t))
        throw ValidationError("unit '" + u.unit_id + "' has event time " +
                              format_double(t) + " outside window [" +
                              format_double(window_.start) + ", " +
                              format_double(window_.end) + "]");
    }
    if (u.observed_until) {
      double t = *u.observed_until;
      if (!window_.contains(t))
        throw ValidationError("unit '" + u.unit_id +
                              "' observed_until outside window");
      if (!u.event_times.empty() && u.event_times.back() > t)
        throw ValidationError("unit '" + u.unit_id +
                              "' has events after its observation end");
    }
  }
}

std::optional<std::size_t> EventDataset::find(const std::string &unit_id) const {
  for (std::size_t i = 0; i < units_.size(); ++i)
    if (units_[i].unit_id == unit_id) return i;
  return std::nullopt;
}

std::size_t EventDataset::index_of(const std::string &unit_id) const {
  if (auto i = find(unit_id)) return *i;
  std::string known;
  for (const auto &u : units_) known += (known.empty() ? "" : ", ") + u.unit_id;
  throw ValidationError("unknown unit '" + unit_id + "' (available: " + known +
                        ")");
}

double EventDataset::observation_end(std::size_t i) const {
  return units_.at(i).observed_until.value_or(window_.end);
}

std::size_t EventDataset::total_events() const {
  std::size_t n = 0;
  for (const auto &u : units_) n += u.event_times.size();
  return n;
}

std::vector<std::string> EventDataset::unit_ids() const {
  std::vector<std::string> ids;
  ids.reserve(units_.size());
  for (const auto &u : units_) ids.push_back(u.unit_id);
  return ids;
}

EventDataset parse_events(std::istream &in, const ObservationWindow &window,
                          bool align_zero) {
  validate(window);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++lineno;
  std::string_view header = line;
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF")
    header.remove_prefix(3);
  if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
  if (header != "unit_id,event_time")
    throw ParseError("header must be exactly 'unit_id,event_time'", 1);

  std::vector<UnitRecord> units;
  std::unordered_map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view row = line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.empty()) continue;
    auto fields = split_fields(row);
    if (fields.size() != 2) throw ParseError("expected 2 fields", lineno);
    std::string id(trim(fields[0]));
    if (id.empty()) throw ParseError("empty unit_id", lineno);
    double t;
    if (!parse_double(fields[1], t))
      throw ParseError("invalid event_time '" + std::string(fields[1]) + "'",
                       lineno);
    auto [it, inserted] = index.emplace(id, units.size());
    if (inserted) units.push_back(UnitRecord{id, {}, std::nullopt});
    units[it->second].event_times.push_back(t);
  }
  if (units.empty()) throw ValidationError("no units");
  for (auto &u : units) {
    std::sort(u.event_times.begin(), u.event_times.end());
    if (align_zero && !u.event_times.empty()) {
      double first = u.event_times.front();
      for (double &t : u.event_times) t -= first;
    }
  }
  return EventDataset(std::move(units), window);
}

EventDataset load_events(const std::string &path,
                         const ObservationWindow &window, bool align_zero) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open event file '" + path + "'");
  return parse_events(in, window, align_zero);
}

void write_events(std::ostream &out, const EventDataset &ds) {
  out << "unit_id,event_time\n";
  for (const auto &u : ds.units())
    for (double t : u.event_times) out << u.unit_id << ',' << format_double(t) << '\n';
}

void save_events(const std::string &path, const EventDataset &ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  write_events(out, ds);
}

double percentile_time(const ObservationWindow &window, double alpha) {
  return window.start + alpha * window.length();
}

EventDataset truncate_at_percentile(const EventDataset &ds,
                                    const std::string &unit_id, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ValidationError("alpha must lie in (0, 1], got " + format_double(alpha));
  std::size_t idx = ds.index_of(unit_id);
  if (alpha == 1.0) return ds;
  double t_star = percentile_time(ds.window(), alpha);
  auto units = ds.units();
  auto &u = units[idx];
  t_star = std::min(t_star, u.observed_until.value_or(t_star));
  auto keep = std::upper_bound(u.event_times.begin(), u.event_times.end(), t_star);
  u.event_times.erase(keep, u.event_times.end());
  u.observed_until = t_star;
  return EventDataset(std::move(units), ds.window());
}

std::pair<EventDataset, EventDataset> holdout_split(const EventDataset &ds,
                                                    const std::string &test_unit) {
  std::size_t idx = ds.index_of(test_unit);
  if (ds.size() < 2)
    throw ValidationError("holdout split needs at least 2 units");
  std::vector<UnitRecord> train;
  train.reserve(ds.size() - 1);
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (i != idx) train.push_back(ds.unit(i));
  return {EventDataset(std::move(train), ds.window()),
          EventDataset({ds.unit(idx)}, ds.window())};
}

std::vector<double> events_in(const UnitRecord &unit, double from, double to) {
  auto lo = std::upper_bound(unit.event_times.begin(), unit.event_times.end(), from);
  auto hi = std::upper_bound(unit.event_times.begin(), unit.event_times.end(), to);
  return {lo, hi};
}

}  // namespace mgcp
