#include <doctest.h>

#include "piperate/coordstore.hpp"
#include "piperate/event_engine.hpp"
#include "support/store_equivalence.hpp"

using namespace piperate;

namespace {

struct StoreFixture {
    EventEngine engine;
    CoordStore store{engine, 10'000};
    std::vector<WatchEvent> events;

    SessionId observer() {
        return store.open_session(
            [this](SessionId, const WatchEvent& ev) { events.push_back(ev); });
    }
    void drain() { engine.run_until(engine.now() + 10'000); }
};

ZPath P(const char* text) { return *ZPath::parse(text); }

}  // namespace

TEST_CASE("zpath parsing and rendering") {
    CHECK(ZPath::parse("/")->render() == "/");
    CHECK(ZPath::parse("/tcData")->render() == "/tcData");
    CHECK(ZPath::parse("/tcData/DN_dn1")->render() == "/tcData/DN_dn1");
    CHECK(ZPath::parse("/a/b")->parent().render() == "/a");
    CHECK(ZPath::parse("/a")->parent().render() == "/");
    CHECK_FALSE(ZPath::parse("").has_value());
    CHECK_FALSE(ZPath::parse("a/b").has_value());
    CHECK_FALSE(ZPath::parse("/a//b").has_value());
    CHECK_FALSE(ZPath::parse("/a/").has_value());
    CHECK(ZPath::root().child("tcData").child("DN_x").render() == "/tcData/DN_x");
}

TEST_CASE("sessions are unique and never reused") {
    StoreFixture f;
    SessionId a = f.store.open_session();
    SessionId b = f.store.open_session();
    CHECK(a.value != b.value);
    CHECK(f.store.close_session(a).ok());
    SessionId c = f.store.open_session();
    CHECK(c.value != a.value);
    CHECK(c.value != b.value);
    CHECK(f.store.close_session(a).error() == StoreError::no_such_session);
}

TEST_CASE("create chain and error cases") {
    StoreFixture f;
    SessionId s = f.store.open_session();
    auto r1 = f.store.create(s, P("/tcData"), "", NodeMode::persistent);
    REQUIRE(r1.ok());
    CHECK(r1.value() == 0);
    auto r2 = f.store.create(s, P("/tcData/DN_dn1"), "", NodeMode::persistent);
    REQUIRE(r2.ok());
    CHECK(r2.value() == 0);

    CHECK(f.store.create(s, P("/a/b"), "", NodeMode::persistent).error() ==
          StoreError::no_parent);
    CHECK(f.store.create(s, P("/tcData"), "", NodeMode::persistent).error() ==
          StoreError::node_exists);

    // Ephemeral nodes cannot have children.
    REQUIRE(f.store.create(s, P("/eph"), "", NodeMode::ephemeral).ok());
    CHECK(f.store.create(s, P("/eph/kid"), "", NodeMode::persistent).error() ==
          StoreError::ephemeral_parent);
}

TEST_CASE("set_data and get_data round trip with versions") {
    StoreFixture f;
    SessionId s = f.store.open_session();
    REQUIRE(f.store.create(s, P("/n"), "initial", NodeMode::persistent).ok());
    auto v1 = f.store.set_data(s, P("/n"), "payload-x");
    REQUIRE(v1.ok());
    CHECK(v1.value() == 1);
    auto got = f.store.get_data(s, P("/n"), false);
    REQUIRE(got.ok());
    CHECK(got.value().data == "payload-x");
    CHECK(got.value().version == 1);

    auto v2 = f.store.set_data(s, P("/n"), "payload-y");
    CHECK(v2.value() == 2);
    CHECK(f.store.set_data(s, P("/missing"), "z").error() == StoreError::no_such_node);
}

TEST_CASE("data watch fires exactly once") {
    StoreFixture f;
    SessionId watcher = f.observer();
    SessionId writer = f.store.open_session();
    REQUIRE(f.store.create(writer, P("/n"), "0", NodeMode::persistent).ok());

    REQUIRE(f.store.get_data(watcher, P("/n"), true).ok());
    f.store.set_data(writer, P("/n"), "1");
    f.store.set_data(writer, P("/n"), "2");
    f.drain();
    REQUIRE(f.events.size() == 1);
    CHECK(f.events[0].kind == WatchKind::data_changed);
    CHECK(f.events[0].path == "/n");

    // Not re-armed: further changes are silent.
    f.store.set_data(writer, P("/n"), "3");
    f.drain();
    CHECK(f.events.size() == 1);

    // Without registration, no events at all.
    f.events.clear();
    REQUIRE(f.store.get_data(watcher, P("/n"), false).ok());
    f.store.set_data(writer, P("/n"), "4");
    f.drain();
    CHECK(f.events.empty());
}

TEST_CASE("repeated registration dedupes to one event") {
    StoreFixture f;
    SessionId watcher = f.observer();
    SessionId writer = f.store.open_session();
    REQUIRE(f.store.create(writer, P("/n"), "0", NodeMode::persistent).ok());
    REQUIRE(f.store.get_data(watcher, P("/n"), true).ok());
    REQUIRE(f.store.get_data(watcher, P("/n"), true).ok());
    f.store.set_data(writer, P("/n"), "1");
    f.drain();
    CHECK(f.events.size() == 1);
}

TEST_CASE("children are sorted and children watches are one-time") {
    StoreFixture f;
    SessionId watcher = f.observer();
    SessionId writer = f.store.open_session();
    REQUIRE(f.store.create(writer, P("/tcData"), "", NodeMode::persistent).ok());
    REQUIRE(f.store.create(writer, P("/tcData/DN_dn1"), "", NodeMode::persistent).ok());
    REQUIRE(f.store.create(writer, P("/tcData/DN_dn1/NM_nm2"), "", NodeMode::persistent).ok());
    REQUIRE(f.store.create(writer, P("/tcData/DN_dn1/NM_nm1"), "", NodeMode::persistent).ok());

    auto children = f.store.get_children(watcher, P("/tcData/DN_dn1"), true);
    REQUIRE(children.ok());
    CHECK(children.value() == std::vector<std::string>{"NM_nm1", "NM_nm2"});

    f.store.create(writer, P("/tcData/DN_dn1/NM_nm3"), "", NodeMode::persistent);
    f.store.create(writer, P("/tcData/DN_dn1/NM_nm4"), "", NodeMode::persistent);
    f.drain();
    REQUIRE(f.events.size() == 1);  // one-time: the second create is silent
    CHECK(f.events[0].kind == WatchKind::children_changed);
    CHECK(f.events[0].path == "/tcData/DN_dn1");
}

TEST_CASE("delete semantics") {
    StoreFixture f;
    SessionId s = f.store.open_session();
    REQUIRE(f.store.create(s, P("/a"), "", NodeMode::persistent).ok());
    REQUIRE(f.store.create(s, P("/a/b"), "", NodeMode::persistent).ok());

    CHECK(f.store.remove(s, P("/a")).error() == StoreError::not_empty);
    CHECK(f.store.remove(s, P("/a/b")).ok());
    CHECK(f.store.get_data(s, P("/a/b"), false).error() == StoreError::no_such_node);

    // A node recreated after delete starts at version 0 again.
    REQUIRE(f.store.set_data(s, P("/a"), "x").value() == 1);
    CHECK(f.store.remove(s, P("/a")).ok());
    auto recreated = f.store.create(s, P("/a"), "", NodeMode::persistent);
    REQUIRE(recreated.ok());
    CHECK(recreated.value() == 0);

    CHECK(f.store.remove(s, P("/missing")).error() == StoreError::no_such_node);
    CHECK(f.store.remove(s, P("/")).error() == StoreError::not_empty);
}

TEST_CASE("close_session deletes ephemerals and notifies other sessions") {
    StoreFixture f;
    SessionId watcher = f.observer();
    SessionId nm = f.store.open_session();
    SessionId setup = f.store.open_session();
    REQUIRE(f.store.create(setup, P("/tcData"), "", NodeMode::persistent).ok());
    REQUIRE(f.store.create(setup, P("/tcData/DN_dn1"), "", NodeMode::persistent).ok());
    REQUIRE(f.store.create(nm, P("/tcData/DN_dn1/NM_nm1"), "rules", NodeMode::ephemeral).ok());

    REQUIRE(f.store.get_children(watcher, P("/tcData/DN_dn1"), true).ok());
    REQUIRE(f.store.close_session(nm).ok());
    f.drain();

    CHECK_FALSE(f.store.node_exists(P("/tcData/DN_dn1/NM_nm1")));
    REQUIRE(f.events.size() == 1);
    CHECK(f.events[0].kind == WatchKind::children_changed);
    CHECK(f.events[0].path == "/tcData/DN_dn1");

    // Close with no ephemerals fires nothing; double close errors.
    f.events.clear();
    CHECK(f.store.close_session(setup).ok());
    f.drain();
    CHECK(f.events.empty());
    CHECK(f.store.close_session(setup).error() == StoreError::no_such_session);
}

TEST_CASE("closing a session discards its unfired watches") {
    StoreFixture f;
    SessionId watcher = f.observer();
    SessionId writer = f.store.open_session();
    REQUIRE(f.store.create(writer, P("/n"), "0", NodeMode::persistent).ok());
    REQUIRE(f.store.get_data(watcher, P("/n"), true).ok());
    REQUIRE(f.store.close_session(watcher).ok());
    f.store.set_data(writer, P("/n"), "1");
    f.drain();
    CHECK(f.events.empty());
}

TEST_CASE("in-flight deliveries to a closed session are dropped") {
    StoreFixture f;
    SessionId watcher = f.observer();
    SessionId writer = f.store.open_session();
    REQUIRE(f.store.create(writer, P("/n"), "0", NodeMode::persistent).ok());
    REQUIRE(f.store.get_data(watcher, P("/n"), true).ok());
    f.store.set_data(writer, P("/n"), "1");  // delivery now in flight
    REQUIRE(f.store.close_session(watcher).ok());
    f.drain();
    CHECK(f.events.empty());
}

TEST_CASE("version monotonicity on a busy path") {
    StoreFixture f;
    SessionId s = f.store.open_session();
    REQUIRE(f.store.create(s, P("/n"), "", NodeMode::persistent).ok());
    std::int64_t last = 0;
    for (int i = 0; i < 50; ++i) {
        auto v = f.store.set_data(s, P("/n"), std::to_string(i));
        REQUIRE(v.ok());
        CHECK(v.value() == last + 1);
        last = v.value();
    }
}

TEST_CASE("ephemeral cleanup leaves no owned nodes behind") {
    StoreFixture f;
    SessionId s = f.store.open_session();
    SessionId owner = f.store.open_session();
    REQUIRE(f.store.create(s, P("/base"), "", NodeMode::persistent).ok());
    for (const char* name : {"z", "a", "m"})
        REQUIRE(f.store
                    .create(owner, P(("/base/" + std::string(name)).c_str()), "",
                            NodeMode::ephemeral)
                    .ok());
    REQUIRE(f.store.close_session(owner).ok());
    auto children = f.store.get_children(s, P("/base"), false);
    REQUIRE(children.ok());
    CHECK(children.value().empty());
}

TEST_CASE("reference model equivalence on random sequences") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto outcome = piperate::testsupport::run_equivalence_sequence(seed, 120);
        REQUIRE_MESSAGE(outcome.ok, outcome.detail);
    }
}
