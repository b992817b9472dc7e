#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mgcp {

struct ObservationWindow {
  double start = 0.0;
  double end = 100.0;

  double length() const { return end - start; }
  bool contains(double t) const { return t >= start && t <= end; }
  bool operator==(const ObservationWindow &) const = default;
};

// Throws ValidationError unless start < end and both are finite.
void validate(const ObservationWindow &window);

struct UnitRecord {
  std::string unit_id;
  std::vector<double> event_times;  // ascending, ties allowed
  // Set when the unit has only been observed up to some t* inside the window.
  std::optional<double> observed_until;

  bool operator==(const UnitRecord &) const = default;
};

/// Per-unit sorted event sequences over one common observation window.
///
/// Immutable once built; the constructor enforces every invariant (at least
/// one unit, unique ids, sorted in-window times).
class EventDataset {
 public:
  EventDataset(std::vector<UnitRecord> units, ObservationWindow window);

  const std::vector<UnitRecord> &units() const { return units_; }
  const ObservationWindow &window() const { return window_; }
  std::size_t size() const { return units_.size(); }
  const UnitRecord &unit(std::size_t i) const { return units_.at(i); }

  std::optional<std::size_t> find(const std::string &unit_id) const;
  // Throws ValidationError naming the known units when absent.
  std::size_t index_of(const std::string &unit_id) const;

  // End of the observed region [window.start, end] for unit i.
  double observation_end(std::size_t i) const;
  std::size_t total_events() const;
  std::vector<std::string> unit_ids() const;

  bool operator==(const EventDataset &) const = default;

 private:
  std::vector<UnitRecord> units_;
  ObservationWindow window_;
};

// CSV with header `unit_id,event_time`. Units are kept in first-appearance
// order and their times are sorted. With align_zero each unit's times are
// shifted so that its first event sits at 0.
EventDataset parse_events(std::istream &in, const ObservationWindow &window,
                          bool align_zero = false);
EventDataset load_events(const std::string &path,
                         const ObservationWindow &window,
                         bool align_zero = false);
void write_events(std::ostream &out, const EventDataset &ds);
void save_events(const std::string &path, const EventDataset &ds);

// Keeps only the named unit's events with t <= t*, where
// t* = start + alpha * (end - start), and records t* on that unit.
EventDataset truncate_at_percentile(const EventDataset &ds,
                                    const std::string &unit_id, double alpha);

double percentile_time(const ObservationWindow &window, double alpha);

// (training units, test unit). The training view keeps the original order.
std::pair<EventDataset, EventDataset> holdout_split(const EventDataset &ds,
                                                    const std::string &test_unit);

// Events of the unit in (from, to].
std::vector<double> events_in(const UnitRecord &unit, double from, double to);

}  // namespace mgcp
