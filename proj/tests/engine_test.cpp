#include <doctest.h>

#include "piperate/event_engine.hpp"

using namespace piperate;

TEST_CASE("events run in time order with FIFO ties") {
    EventEngine engine;
    std::vector<int> order;
    engine.schedule_at(200, [&] { order.push_back(3); });
    engine.schedule_at(100, [&] { order.push_back(1); });
    engine.schedule_at(100, [&] { order.push_back(2); });
    engine.run_until(300);
    CHECK(order == std::vector<int>{1, 2, 3});
    CHECK(engine.now() == 300);
}

TEST_CASE("run_until horizon is inclusive and clock advances past empty queues") {
    EventEngine engine;
    int hits = 0;
    engine.schedule_at(500, [&] { ++hits; });
    engine.run_until(499);
    CHECK(hits == 0);
    engine.run_until(500);
    CHECK(hits == 1);
    engine.run_until(10'000);
    CHECK(engine.now() == 10'000);
    CHECK(engine.empty());
}

TEST_CASE("handlers can schedule follow-up events") {
    EventEngine engine;
    std::vector<SimTime> fired;
    std::function<void()> chain = [&] {
        fired.push_back(engine.now());
        if (fired.size() < 5) engine.schedule_after(10, chain);
    };
    engine.schedule_at(0, chain);
    engine.run_until(100);
    CHECK(fired == std::vector<SimTime>{0, 10, 20, 30, 40});
}

TEST_CASE("past timestamps are clamped to now") {
    EventEngine engine;
    SimTime seen = -1;
    engine.schedule_at(50, [&] {
        engine.schedule_at(10, [&] { seen = engine.now(); });
    });
    engine.run_until(60);
    CHECK(seen == 50);
}
