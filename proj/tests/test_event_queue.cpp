#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fabricnet/event_queue.hpp"

using fabricnet::sim::EventQueue;

TEST_CASE("single event dispatches") {
  EventQueue q;
  int hits = 0;
  q.schedule(0.0, [&] { ++hits; });
  CHECK(q.run_until(1.0) == 1);
  CHECK(hits == 1);
}

TEST_CASE("equal times dispatch in insertion order") {
  EventQueue q;
  std::vector<int> order;
  q.schedule(5.0, [&] { order.push_back(1); });
  q.schedule(5.0, [&] { order.push_back(2); });
  q.schedule(5.0, [&] { order.push_back(3); });
  q.run_until(5.0);
  CHECK(order == std::vector<int>{1, 2, 3});
}

TEST_CASE("scheduling in the past is a causality violation") {
  EventQueue q;
  q.schedule(2.0, [] {});
  q.run_until(3.0);
  CHECK_THROWS_AS(q.schedule(2.0, [] {}), std::invalid_argument);
}

TEST_CASE("empty run advances the clock") {
  EventQueue q;
  CHECK(q.run_until(10.0) == 0);
  CHECK(q.now() == 10.0);
}

TEST_CASE("run_until horizon is inclusive") {
  EventQueue q;
  int hits = 0;
  q.schedule(1.0, [&] { ++hits; });
  q.schedule(2.0, [&] { ++hits; });
  q.schedule(3.0, [&] { ++hits; });
  CHECK(q.run_until(2.0) == 2);
  CHECK(hits == 2);
  CHECK(q.pending() == 1);
}

TEST_CASE("handlers can schedule follow-ups inside the horizon") {
  EventQueue q;
  std::vector<double> times;
  q.schedule(1.0, [&] {
    times.push_back(q.now());
    q.schedule(1.5, [&] { times.push_back(q.now()); });
  });
  CHECK(q.run_until(2.0) == 2);
  CHECK(times == std::vector<double>{1.0, 1.5});
}

TEST_CASE("follow-ups beyond the horizon wait") {
  EventQueue q;
  int hits = 0;
  q.schedule(1.0, [&] { q.schedule(5.0, [&] { ++hits; }); });
  q.run_until(2.0);
  CHECK(hits == 0);
  q.run_until(5.0);
  CHECK(hits == 1);
}

TEST_CASE("cancelled events never dispatch") {
  EventQueue q;
  int hits = 0;
  const auto h = q.schedule(1.0, [&] { ++hits; });
  CHECK(q.cancel(h));
  q.run_until(2.0);
  CHECK(hits == 0);
  CHECK_FALSE(q.cancel(h));
}

TEST_CASE("cancel after dispatch reports false") {
  EventQueue q;
  const auto h = q.schedule(1.0, [] {});
  q.run_until(2.0);
  CHECK_FALSE(q.cancel(h));
}

TEST_CASE("replay produces an identical dispatch log") {
  const auto run = [] {
    EventQueue q;
    std::vector<std::string> log;
    q.schedule(1.0, [&] { log.push_back("a@" + std::to_string(q.now())); });
    q.schedule(1.0, [&] { log.push_back("b@" + std::to_string(q.now())); });
    q.schedule(0.5, [&] {
      log.push_back("c@" + std::to_string(q.now()));
      q.schedule(0.75, [&] { log.push_back("d@" + std::to_string(q.now())); });
    });
    q.run_until(2.0);
    return log;
  };
  CHECK(run() == run());
}
