#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "guiding/io.hpp"

#include <cstdio>
#include <filesystem>

using namespace guiding;
using guiding::io::json;

TEST_CASE("time and value formatting") {
    CHECK(io::format_time(0.0) == "0.000000000");
    CHECK(io::format_time(1.25) == "1.250000000");
    CHECK(io::format_time(10.0 / 3.0) == "3.333333333");

    // shortest-round-trip text must survive a parse exactly
    for (const double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 123.456}) {
        CHECK(std::stod(io::format_value(v)) == v);
    }
}

TEST_CASE("topology JSON round trip is canonical") {
    const auto topo = NetworkTopology::random(8, 0.4, 0.0, 0.5, 3);
    const json j = io::topology_to_json(topo);
    const auto back = io::topology_from_json(j);
    CHECK(topo == back);
    // serializing again yields the identical document
    CHECK(io::topology_to_json(back) == j);
    CHECK(j.at("num_users") == 8);

    json bad = j;
    bad.erase("edges");
    CHECK_THROWS(io::topology_from_json(bad));

    // self loops only pass through when allowed
    const auto self = NetworkTopology::from_edges({Edge{0, 0, 0.2}}, 1, true);
    const json js = io::topology_to_json(self);
    CHECK_THROWS_AS(io::topology_from_json(js), std::invalid_argument);
    CHECK(io::topology_from_json(js, true) == self);
}

TEST_CASE("event log CSV round trip") {
    EventLog log;
    log.t0 = 0.0;
    log.t1 = 10.0;
    log.events = {Event{0.123456789, 0}, Event{1.5, 3}, Event{9.999999999, 1}};
    const std::string csv = io::event_log_to_csv(log);
    CHECK(csv == "t,user\n0.123456789,0\n1.500000000,3\n9.999999999,1\n");

    const EventLog back = io::event_log_from_csv(csv, 0.0, 10.0);
    REQUIRE(back.events.size() == 3);
    CHECK(back.t0 == 0.0);
    CHECK(back.t1 == 10.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.events[i].t == log.events[i].t);
        CHECK(back.events[i].user == log.events[i].user);
    }
    // a second serialization is bit-stable
    CHECK(io::event_log_to_csv(back) == csv);

    CHECK_THROWS_AS(io::event_log_from_csv("time,user\n", 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(io::event_log_from_csv("t,user\n0.5\n", 0.0, 1.0), std::invalid_argument);
    CHECK(io::event_log_from_csv("t,user\n", 0.0, 1.0).events.empty());
}

TEST_CASE("trajectory CSV layout") {
    Trajectory traj;
    traj.grid = TimeGrid::uniform(0.0, 1.0, 1);
    traj.x = Mat::Zero(2, 2);
    traj.u = Mat::Zero(2, 2);
    traj.x << 0.5, -1.0, 0.25, 2.0;
    traj.u << 0.1, 0.0, 0.0, -0.3;
    const std::string csv = io::trajectory_to_csv(traj);
    CHECK(csv ==
          "t,user,x,u\n"
          "0.000000000,0,0.5,0.1\n"
          "0.000000000,1,-1,0\n"
          "1.000000000,0,0.25,0\n"
          "1.000000000,1,2,-0.3\n");
}

TEST_CASE("value coefficients JSON round trip") {
    const TimeGrid grid = TimeGrid::uniform(0.0, 2.0, 4);
    ValueCoefficients lsog;
    lsog.kind = ObjectiveKind::LSOG;
    lsog.grid = grid;
    lsog.v0 = {0.1, 0.2, 0.3, 0.4, 0.5};
    lsog.v1 = Mat::Random(5, 2);
    for (int k = 0; k < 5; ++k) {
        Mat m = Mat::Random(2, 2);
        lsog.v11.push_back(Mat(0.5 * (m + m.transpose())));
    }
    const json j = io::value_coefficients_to_json(lsog);
    const auto back = io::value_coefficients_from_json(j);
    CHECK(back.kind == ObjectiveKind::LSOG);
    CHECK(back.grid.t1 == 2.0);
    CHECK(back.grid.steps == 4);
    CHECK(back.v0 == lsog.v0);
    CHECK(back.v1 == lsog.v1);
    REQUIRE(back.v11.size() == 5);
    for (int k = 0; k < 5; ++k) CHECK(back.v11[static_cast<std::size_t>(k)] == lsog.v11[static_cast<std::size_t>(k)]);
    // only the lower triangle is stored
    CHECK(j.at("v11").at(0).at(0).size() == 1);
    CHECK(j.at("v11").at(0).at(1).size() == 2);

    ValueCoefficients oim;
    oim.kind = ObjectiveKind::OIM;
    oim.grid = grid;
    oim.v0 = {0.0, 0.0, 0.0, 0.0, 0.0};
    oim.v1 = Mat::Constant(5, 3, -1.0);
    const json jo = io::value_coefficients_to_json(oim);
    CHECK_FALSE(jo.contains("v11"));
    const auto oim_back = io::value_coefficients_from_json(jo);
    CHECK(oim_back.kind == ObjectiveKind::OIM);
    CHECK(oim_back.v1 == oim.v1);
    CHECK(oim_back.v11.empty());
}

TEST_CASE("link events CSV round trip") {
    LinkEvents events;
    events.t0 = 0.0;
    events.t1 = 4.0;
    events.records = {LinkEvent{0.25, 2, 1}, LinkEvent{3.5, 0, 2}};
    const std::string csv = io::link_events_to_csv(events);
    CHECK(csv == "t,source,target\n0.250000000,2,1\n3.500000000,0,2\n");
    const LinkEvents back = io::link_events_from_csv(csv, 0.0, 4.0);
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[0].t == 0.25);
    CHECK(back.records[0].source == 2);
    CHECK(back.records[0].target == 1);
    CHECK(back.records[1].source == 0);
    CHECK(io::link_events_to_csv(back) == csv);

    CHECK_THROWS_AS(io::link_events_from_csv("t,src,dst\n", 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(io::link_events_from_csv("t,source,target\n1.0,2\n", 0.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("cost JSON fields") {
    CostBreakdown cost{1.0, 2.0, 3.0, 6.0};
    const json j = io::cost_breakdown_to_json(cost);
    CHECK(j.at("state_cost") == 1.0);
    CHECK(j.at("control_cost") == 2.0);
    CHECK(j.at("terminal_cost") == 3.0);
    CHECK(j.at("total") == 6.0);

    MonteCarloCost mc;
    mc.mean = 2.5;
    mc.variance = 0.25;
    mc.variance_defined = true;
    mc.runs = {cost, cost};
    const json jm = io::monte_carlo_cost_to_json(mc);
    CHECK(jm.at("n_runs") == 2);
    CHECK(jm.at("mean") == 2.5);
    CHECK(jm.at("runs").size() == 2);

    GammaFit fit;
    fit.gamma = Vec::Constant(2, 0.4);
    fit.loglik = -3.0;
    fit.n_events = 5;
    const json jg = io::gamma_fit_to_json(fit);
    CHECK(jg.at("gamma").size() == 2);
    CHECK(jg.at("gamma").at(1) == 0.4);
    CHECK(jg.at("loglik") == -3.0);
    CHECK(jg.at("n_events") == 5);
}

TEST_CASE("file helpers") {
    const auto path = std::filesystem::temp_directory_path() / "guiding_io_test.txt";
    io::write_file(path.string(), "hello\nworld\n");
    CHECK(io::read_file(path.string()) == "hello\nworld\n");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(io::read_file(path.string()), std::runtime_error);
    CHECK_THROWS_AS(io::write_file("/nonexistent-dir/x/y.txt", "a"), std::runtime_error);
}
