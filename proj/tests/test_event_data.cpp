#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "mgcp/errors.hpp"
#include "mgcp/event_data.hpp"

using namespace mgcp;

namespace {

EventDataset parse(const std::string &text, ObservationWindow w = {0, 10}, bool align = false) {
  std::istringstream is(text);
  return parse_events(is, w, align);
}

EventDataset random_dataset(std::mt19937_64 &rng, int units) {
  std::uniform_real_distribution<double> time(0.0, 100.0);
  std::uniform_int_distribution<int> count(0, 30);
  std::vector<UnitRecord> recs;
  for (int u = 0; u < units; ++u) {
    UnitRecord r{"unit" + std::to_string(u), {}, std::nullopt};
    const int n = count(rng);
    for (int k = 0; k < n; ++k) r.event_times.push_back(time(rng));
    std::sort(r.event_times.begin(), r.event_times.end());
    recs.push_back(r);
  }
  return EventDataset(recs, {0, 100});
}

}  // namespace

TEST(LoadEvents, GroupsAndSortsByFirstAppearance) {
  auto ds = parse("unit_id,event_time\nu1,1.5\nu1,0.5\nu2,3.0\n");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.unit(0).unit_id, "u1");
  EXPECT_EQ(ds.unit(0).event_times, (std::vector<double>{0.5, 1.5}));
  EXPECT_EQ(ds.unit(1).event_times, (std::vector<double>{3.0}));
}

TEST(LoadEvents, HeaderOnlyHasNoUnits) {
  try {
    parse("unit_id,event_time\n");
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("no units"), std::string::npos);
  }
}

TEST(LoadEvents, OutOfWindowNamesUnitAndTime) {
  try {
    parse("unit_id,event_time\nu1,11.0\n");
    FAIL();
  } catch (const ValidationError &e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("u1"), std::string::npos);
    EXPECT_NE(what.find("11"), std::string::npos);
  }
}

TEST(LoadEvents, MalformedRowReportsLine) {
  try {
    parse("unit_id,event_time\nu1,1\nu1,abc\n");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(parse("unit_id,event_time\nu1,1,2\n"), ParseError);
  EXPECT_THROW(parse("unit_id,event_time\nu1,nan\n"), ParseError);
  EXPECT_THROW(parse("unit_id,event_time\n,1\n"), ParseError);
  EXPECT_THROW(parse("id,time\nu1,1\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(LoadEvents, AcceptsCrlfAndBom) {
  auto ds = parse("\xEF\xBB\xBFunit_id,event_time\r\nu1,2\r\nu1,1\r\n");
  EXPECT_EQ(ds.unit(0).event_times, (std::vector<double>{1.0, 2.0}));
}

TEST(LoadEvents, TiesArePreserved) {
  auto ds = parse("unit_id,event_time\nu1,2\nu1,2\n");
  EXPECT_EQ(ds.unit(0).event_times.size(), 2u);
}

TEST(LoadEvents, AlignZeroShiftsEachUnit) {
  auto ds = parse("unit_id,event_time\na,5\na,7\nb,3\n", {0, 10}, true);
  EXPECT_EQ(ds.unit(0).event_times, (std::vector<double>{0.0, 2.0}));
  EXPECT_EQ(ds.unit(1).event_times, (std::vector<double>{0.0}));
}

TEST(LoadEvents, MissingFile) {
  EXPECT_THROW(load_events("/nonexistent/events.csv", {0, 10}), ValidationError);
}

TEST(EventDataset, Invariants) {
  EXPECT_THROW(EventDataset({}, {0, 1}), ValidationError);
  EXPECT_THROW(EventDataset({{"a", {}, {}}, {"a", {}, {}}}, {0, 1}), ValidationError);
  EXPECT_THROW(EventDataset({{"a", {0.5, 0.2}, {}}}, {0, 1}), ValidationError);
  EXPECT_THROW(EventDataset({{"a", {}, {}}}, {1, 1}), ValidationError);
  EXPECT_THROW(EventDataset({{"a", {0.8}, 0.5}}, {0, 1}), ValidationError);
  EventDataset ds({{"a", {0.1}, {}}, {"b", {}, {}}}, {0, 1});
  EXPECT_EQ(ds.total_events(), 1u);
  EXPECT_EQ(ds.observation_end(1), 1.0);
  try {
    ds.index_of("zz");
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("a, b"), std::string::npos);
  }
}

TEST(Truncate, KeepsEventsUpToInclusiveThreshold) {
  EventDataset ds({{"u", {10, 30, 50, 55, 80}, {}}, {"v", {90}, {}}}, {0, 100});
  auto t = truncate_at_percentile(ds, "u", 0.5);
  EXPECT_EQ(t.unit(0).event_times, (std::vector<double>{10, 30, 50}));
  EXPECT_EQ(t.observation_end(0), 50.0);
  EXPECT_EQ(t.unit(1), ds.unit(1));
  EXPECT_EQ(percentile_time(ds.window(), 0.3), 30.0);
}

TEST(Truncate, AlphaOneIsIdentityAndBadAlphaThrows) {
  EventDataset ds({{"u", {10, 80}, {}}}, {0, 100});
  EXPECT_EQ(truncate_at_percentile(ds, "u", 1.0), ds);
  EXPECT_THROW(truncate_at_percentile(ds, "u", 0.0), ValidationError);
  EXPECT_THROW(truncate_at_percentile(ds, "u", 1.5), ValidationError);
  EXPECT_THROW(truncate_at_percentile(ds, "nope", 0.5), ValidationError);
}

TEST(Truncate, IdempotentAndMonotoneOnRandomData) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> alpha(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto ds = random_dataset(rng, 3);
    double a1 = alpha(rng), a2 = alpha(rng);
    if (a1 > a2) std::swap(a1, a2);
    const auto t1 = truncate_at_percentile(ds, "unit1", a1);
    EXPECT_EQ(truncate_at_percentile(t1, "unit1", a1), t1);
    const auto t2 = truncate_at_percentile(ds, "unit1", a2);
    const auto &k1 = t1.unit(1).event_times, &k2 = t2.unit(1).event_times;
    EXPECT_TRUE(std::includes(k2.begin(), k2.end(), k1.begin(), k1.end()));
    for (double t : k1) EXPECT_LE(t, percentile_time(ds.window(), a1));
  }
}

TEST(HoldoutSplit, PartitionsUnits) {
  std::vector<UnitRecord> recs;
  for (int u = 1; u <= 20; ++u) recs.push_back({"u" + std::to_string(u), {double(u)}, {}});
  EventDataset ds(recs, {0, 100});
  auto [train, test] = holdout_split(ds, "u7");
  EXPECT_EQ(train.size(), 19u);
  EXPECT_EQ(test.size(), 1u);
  EXPECT_EQ(test.unit(0).unit_id, "u7");
  EXPECT_FALSE(train.find("u7").has_value());

  EventDataset two({{"a", {}, {}}, {"b", {}, {}}}, {0, 1});
  auto [tr2, te2] = holdout_split(two, "a");
  EXPECT_EQ(tr2.size(), 1u);
  EXPECT_EQ(te2.unit(0).unit_id, "a");
  EXPECT_THROW(holdout_split(two, "zz"), ValidationError);
  EXPECT_THROW(holdout_split(EventDataset({{"a", {}, {}}}, {0, 1}), "a"), ValidationError);
}

TEST(HoldoutSplit, PreservesTotalEventCount) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto ds = random_dataset(rng, 4);
    auto [train, test] = holdout_split(ds, "unit" + std::to_string(trial % 4));
    EXPECT_EQ(train.total_events() + test.total_events(), ds.total_events());
  }
}

TEST(Serialization, WriteThenLoadIsIdentity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto ds = random_dataset(rng, 5);
    std::ostringstream os;
    write_events(os, ds);
    std::istringstream is(os.str());
    auto back = parse_events(is, ds.window());
    // Units without events cannot be represented in the event file.
    std::vector<UnitRecord> nonempty;
    for (const auto &u : ds.units())
      if (!u.event_times.empty()) nonempty.push_back(u);
    ASSERT_EQ(back.size(), nonempty.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_EQ(back.unit(i).unit_id, nonempty[i].unit_id);
      EXPECT_EQ(back.unit(i).event_times, nonempty[i].event_times);
    }
  }
}

TEST(EventsIn, HalfOpenInterval) {
  UnitRecord u{"u", {1, 2, 3, 4}, {}};
  EXPECT_EQ(events_in(u, 2, 4), (std::vector<double>{3, 4}));
  EXPECT_TRUE(events_in(u, 4, 10).empty());
}
