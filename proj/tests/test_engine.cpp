#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "tcpsim/engine.hpp"
#include "tcpsim/rng.hpp"

using namespace tcpsim;

TEST_CASE("events fire in time order with ties broken by schedule order") {
    Engine eng;
    std::vector<int> order;
    eng.schedule(SimTime::from_ns(10), [&] { order.push_back(1); });
    eng.schedule(SimTime::from_ns(5), [&] { order.push_back(2); });
    eng.schedule(SimTime::from_ns(10), [&] { order.push_back(3); });
    eng.schedule(SimTime::from_ns(10), [&] { order.push_back(4); });
    eng.run_until(SimTime::from_ns(100));
    CHECK(order == std::vector<int>{2, 1, 3, 4});
}

TEST_CASE("cancelled events do not fire and report their pending state") {
    Engine eng;
    int fired = 0;
    auto h = eng.schedule(SimTime::from_ns(10), [&] { ++fired; });
    eng.schedule(SimTime::from_ns(20), [&] { ++fired; });
    CHECK(eng.cancel(h));
    CHECK_FALSE(eng.cancel(h));  // second cancel is a no-op
    auto st = eng.run_until(SimTime::from_ns(100));
    CHECK(fired == 1);
    CHECK(st.events_processed == 1);
}

TEST_CASE("run_until includes events at exactly the end time") {
    Engine eng;
    int fired = 0;
    eng.schedule(SimTime::from_ns(50), [&] { ++fired; });
    eng.schedule(SimTime::from_ns(51), [&] { ++fired; });
    eng.run_until(SimTime::from_ns(50));
    CHECK(fired == 1);
    CHECK(eng.now() == SimTime::from_ns(50));
}

TEST_CASE("handlers can schedule further events") {
    Engine eng;
    std::vector<std::int64_t> at;
    std::function<void()> chain = [&] {
        at.push_back(eng.now().ns());
        if (at.size() < 5)
            eng.schedule(SimTime::from_ns(7), chain);
    };
    eng.schedule(SimTime::from_ns(0), chain);
    eng.run_until(SimTime::from_ns(1000));
    CHECK(at == std::vector<std::int64_t>{0, 7, 14, 21, 28});
}

TEST_CASE("scheduling rejects negative delays and empty actions") {
    Engine eng;
    CHECK_THROWS_AS(eng.schedule(SimTime::from_ns(-1), [] {}), std::invalid_argument);
    CHECK_THROWS_AS(eng.schedule(SimTime::from_ns(1), nullptr), std::invalid_argument);
}

TEST_CASE("a storm of randomly timed events is processed in nondecreasing order") {
    Engine eng;
    SplitMix64 rng(99);
    std::vector<std::int64_t> fire_times;
    std::vector<std::int64_t> seen;
    for (int i = 0; i < 5000; ++i) {
        std::int64_t t = static_cast<std::int64_t>(rng.next() % 1'000'000);
        fire_times.push_back(t);
        eng.schedule(SimTime::from_ns(t), [&, t] { seen.push_back(t); });
    }
    eng.run_until(SimTime::from_ns(1'000'000));
    REQUIRE(seen.size() == fire_times.size());
    CHECK(std::is_sorted(seen.begin(), seen.end()));
    std::sort(fire_times.begin(), fire_times.end());
    CHECK(seen == fire_times);
}
