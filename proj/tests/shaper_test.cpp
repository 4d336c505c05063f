#include <doctest.h>

#include <random>

#include "piperate/shaper.hpp"
#include "support/bucket_oracle.hpp"

using namespace piperate;

namespace {

const PipeKey kKeyA{"10.0.0.1", 32768, "10.0.0.2", 50010};
const PipeKey kKeyB{"10.0.0.1", 32769, "10.0.0.2", 50010};

}  // namespace

TEST_CASE("pipe key and pattern rendering") {
    CHECK(kKeyA.render() == "10.0.0.1:32768->10.0.0.2:50010");
    CHECK(PipePattern::exact(kKeyA).render() == "10.0.0.1:32768->10.0.0.2:50010");
    PipePattern wild;
    wild.dst_host = "10.0.0.2";
    CHECK(wild.render() == "*:*->10.0.0.2:*");
    CHECK(wild.matches(kKeyA));
    CHECK(wild.exact_fields() == 1);
}

TEST_CASE("configure_class starts full and clamps on shrink") {
    TrafficShaper sh;
    REQUIRE(sh.configure_class("c1", 1'000'000, 125'000).ok());
    auto g = sh.grant("c1", 125'000, 0);
    REQUIRE(g.ok());
    CHECK(g.value() == doctest::Approx(125'000));  // initial bucket is full

    REQUIRE(sh.configure_class("c1", 1'000'000, 125'000).ok());
    // Refill back to full, then shrink the burst; tokens must clamp.
    sh.grant("c1", 0, 1'000'000);
    REQUIRE(sh.configure_class("c1", 1'000'000, 50'000).ok());
    CHECK(sh.tokens("c1") == doctest::Approx(50'000));

    CHECK(sh.configure_class("c1", 0, 100).error() == ShaperError::invalid_rate);
    CHECK(sh.configure_class("c1", 100, 0).error() == ShaperError::invalid_rate);
}

TEST_CASE("filter priority, specificity, and cascade removal") {
    TrafficShaper sh;
    REQUIRE(sh.configure_class("c1", 1000, 100).ok());
    REQUIRE(sh.configure_class("c2", 1000, 100).ok());

    PipePattern exact = PipePattern::exact(kKeyA);
    PipePattern src_wild = exact;
    src_wild.src_port = std::nullopt;

    SUBCASE("exact match routes to its class") {
        REQUIRE(sh.add_filter(exact, "c1", 10).ok());
        CHECK(sh.classify(kKeyA) == "c1");
        CHECK_FALSE(sh.classify(kKeyB).has_value());  // differs in src_port
    }

    SUBCASE("lower priority value wins") {
        REQUIRE(sh.add_filter(exact, "c1", 2).ok());
        REQUIRE(sh.add_filter(src_wild, "c2", 1).ok());
        CHECK(sh.classify(kKeyA) == "c2");
    }

    SUBCASE("equal priority prefers the more exact pattern") {
        REQUIRE(sh.add_filter(src_wild, "c2", 1).ok());
        REQUIRE(sh.add_filter(exact, "c1", 1).ok());
        CHECK(sh.classify(kKeyA) == "c1");
    }

    SUBCASE("remove_class cascades to filters") {
        REQUIRE(sh.add_filter(exact, "c1", 10).ok());
        REQUIRE(sh.remove_class("c1").ok());
        CHECK_FALSE(sh.classify(kKeyA).has_value());
        CHECK(sh.filters().empty());
    }

    SUBCASE("duplicate and missing filter errors") {
        REQUIRE(sh.add_filter(exact, "c1", 10).ok());
        CHECK(sh.add_filter(exact, "c1", 5).error() == ShaperError::duplicate_filter);
        CHECK(sh.add_filter(exact, "nope", 5).error() == ShaperError::no_such_class);
        CHECK(sh.remove_filter(src_wild, "c1").error() == ShaperError::no_such_filter);
    }
}

TEST_CASE("classify with empty table is unclassified and classification is pure") {
    TrafficShaper sh;
    CHECK_FALSE(sh.classify(kKeyA).has_value());
    REQUIRE(sh.configure_class("c1", 1000, 100).ok());
    REQUIRE(sh.add_filter(PipePattern::exact(kKeyA), "c1", 10).ok());
    for (int i = 0; i < 10; ++i) CHECK(sh.classify(kKeyA) == "c1");
}

TEST_CASE("grant follows the fluid token bucket") {
    TrafficShaper sh;
    // rate 1000 B/s, burst 500 B, starts full.
    REQUIRE(sh.configure_class("c", 1000, 500).ok());
    auto g0 = sh.grant("c", 1500, 0);
    CHECK(g0.value() == doctest::Approx(500));
    auto g1 = sh.grant("c", 1000, from_seconds(1.0));  // refilled 1000, capped at 500
    CHECK(g1.value() == doctest::Approx(500));

    // Zero request leaves tokens alone apart from the refill.
    auto g2 = sh.grant("c", 0, from_seconds(1.2));
    CHECK(g2.value() == 0);
    CHECK(sh.tokens("c") == doctest::Approx(200));

    CHECK(sh.grant("missing", 1, 0).error() == ShaperError::no_such_class);
}

TEST_CASE("saturating demand over a window grants burst plus rate times window") {
    TrafficShaper sh;
    const double rate = 1000, burst = 500;
    REQUIRE(sh.configure_class("c", rate, burst).ok());
    double total = 0;
    const SimTime dt = from_seconds(0.5);
    for (SimTime t = 0; t <= from_seconds(10.0); t += dt)
        total += sh.grant("c", 1e9, t).value();
    CHECK(total == doctest::Approx(burst + rate * 10.0));  // 10'500
}

TEST_CASE("token bucket bound and oracle agreement on random sequences") {
    std::mt19937_64 rng(20210);
    for (int round = 0; round < 400; ++round) {
        const double rate = std::uniform_real_distribution<>(100.0, 1e6)(rng);
        const double burst = std::uniform_real_distribution<>(10.0, 1e5)(rng);
        TrafficShaper sh;
        REQUIRE(sh.configure_class("c", rate, burst).ok());

        std::vector<piperate::testsupport::BucketRequest> requests;
        std::vector<double> grants;
        double t = 0;
        const int steps = std::uniform_int_distribution<>(5, 40)(rng);
        for (int i = 0; i < steps; ++i) {
            t += std::uniform_real_distribution<>(0.0, 0.5)(rng);
            const double req = std::uniform_real_distribution<>(0.0, burst * 2)(rng);
            requests.push_back({t, req});
            grants.push_back(sh.grant("c", req, from_seconds(t)).value());
        }

        // Window bound: granted bytes in (t_i, t_j] never exceed burst + rate*W.
        for (std::size_t i = 0; i < requests.size(); ++i) {
            double sum = 0;
            for (std::size_t j = i; j < requests.size(); ++j) {
                sum += grants[j];
                const double window =
                    requests[j].at_seconds - (i == 0 ? 0.0 : requests[i - 1].at_seconds);
                CHECK(sum <= burst + rate * window + 1e-6 * (burst + rate * window + 1));
            }
        }

        // Cumulative-form oracle agreement at every timestamp.
        auto oracle = piperate::testsupport::fluid_bucket_grants(rate, burst, requests);
        for (std::size_t i = 0; i < grants.size(); ++i)
            CHECK(grants[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
    }
}

TEST_CASE("long-run rate approaches the configured rate under saturation") {
    TrafficShaper sh;
    const double rate = 40e6, burst = 4e6;
    REQUIRE(sh.configure_class("c", rate, burst).ok());
    const SimTime dt = from_seconds(0.1);
    double total = 0;
    const double window_s = 30.0;
    for (SimTime t = 0; t < from_seconds(window_s); t += dt)
        total += sh.grant("c", 1e12, t).value();
    const double mean = total / window_s;
    // One burst of slack spread over the window.
    CHECK(mean >= rate);
    CHECK(mean <= rate + burst / window_s + 1);
}
