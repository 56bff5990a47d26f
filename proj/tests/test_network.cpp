#include "cldigdt/network.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"

using namespace cldigdt;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("ieee33 case matches the published asset tables") {
  NetworkCase net = ieee33_case();
  CHECK(net.buses.size() == 33);
  CHECK(net.lines.size() == 32);
  CHECK(net.time_steps == 24);
  CHECK(net.dt_hours == doctest::Approx(1.0));
  REQUIRE(net.dgs.size() == 4);
  CHECK(net.dgs[0].p_max == doctest::Approx(600.0));
  CHECK(net.dgs[0].cost == doctest::Approx(4.0));
  CHECK(net.dgs[3].p_max == doctest::Approx(50.0));
  CHECK(net.dgs[3].cost == doctest::Approx(2.0));
  REQUIRE(net.esss.size() == 4);
  CHECK(net.esss[0].energy_max == doctest::Approx(600.0));
  CHECK(net.esss[0].efficiency == doctest::Approx(0.9));
  CHECK(validate_case(net).empty());
}

TEST_CASE("serialization round trips field for field") {
  NetworkCase net = ieee33_case();
  const std::string path = temp_path("cldigdt_case_roundtrip.json");
  save_network_case(net, path);
  NetworkCase back = load_network_case(path);
  CHECK(case_to_json(net) == case_to_json(back));
  std::remove(path.c_str());
}

TEST_CASE("missing file reports a not-found error") {
  CHECK_THROWS_AS(load_network_case("/nonexistent/case.json"), CaseError);
}

TEST_CASE("a loop breaks radiality") {
  NetworkCase net = ieee33_case();
  Line extra = net.lines.front();
  extra.from = 18;
  extra.to = 33;
  net.lines.push_back(extra);
  auto bad = validate_case(net);
  bool radiality = false;
  for (const auto& m : bad) radiality = radiality || m.find("radiality") != std::string::npos;
  CHECK(radiality);
  CHECK_THROWS_AS(case_from_json(case_to_json(net)), CaseError);
}

TEST_CASE("disconnected networks are flagged") {
  NetworkCase net = ieee33_case();
  // Rewire one lateral onto itself: line count stays n-1 but bus 22 detaches.
  for (Line& l : net.lines)
    if (l.to == 22) {
      l.from = 21;
      l.to = 21;
    }
  auto bad = validate_case(net);
  bool connectivity = false;
  for (const auto& m : bad) connectivity = connectivity || m.find("connected") != std::string::npos;
  CHECK(connectivity);
}

TEST_CASE("each type invariant is reported") {
  NetworkCase net = ieee33_case();

  SUBCASE("negative resistance") {
    net.lines[3].r = -0.1;
    auto bad = validate_case(net);
    REQUIRE(bad.size() == 1);
    CHECK(bad[0].find("negative resistance") != std::string::npos);
  }
  SUBCASE("inverted energy bounds") {
    net.esss[1].energy_min = 500;
    net.esss[1].energy_max = 400;
    auto bad = validate_case(net);
    bool found = false;
    for (const auto& m : bad) found = found || m.find("energy bounds inverted") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("power factor angle out of range") {
    net.buses[5].pf_angle[3] = 1.6;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("nonpositive flow limit") {
    net.lines[0].p_max = 0.0;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("loss factor at one") {
    net.lines[0].loss_factor = 1.0;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("inverted DG bounds") {
    net.dgs[0].p_min = 700;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("negative ramp") {
    net.dgs[0].ramp_up = -1;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("negative cost") {
    net.dgs[0].cost = -1;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("inverted recourse bounds") {
    net.dgs[0].recourse_p_min = 10;
    net.dgs[0].recourse_p_max = -10;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("inverted reactive bounds") {
    net.dgs[0].q_min = 300;
    net.dgs[0].q_max = -300;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("efficiency above one") {
    net.esss[0].efficiency = 1.2;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("initial energy outside bounds") {
    net.esss[0].initial_energy = 1e4;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("negative ESS power bound") {
    net.esss[0].charge_min = -5;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("duplicate bus id") {
    net.buses[5].id = net.buses[4].id;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("inverted voltage bounds") {
    net.v_min_sq = 1.2;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("negative price") {
    net.price_d[3] = -1;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("price vector length") {
    net.price_d.pop_back();
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("negative pv capacity") {
    net.pv_cap = -1;
    CHECK(!validate_case(net).empty());
  }
  SUBCASE("dg on unknown bus") {
    net.dgs[0].bus = 99;
    CHECK(!validate_case(net).empty());
  }
}

TEST_CASE("bfs reaches every bus from the substation") {
  NetworkCase net = ieee33_case();
  // validate_case already runs the reachability check; a clean report plus
  // the line count is the radiality property.
  CHECK(net.lines.size() + 1 == net.buses.size());
  CHECK(validate_case(net).empty());
}

TEST_CASE("scalar pf_angle in the file broadcasts over time") {
  NetworkCase net = ieee33_case();
  std::string text = case_to_json(net);
  // Replace one bus's vector with a scalar.
  auto pos = text.find("\"pf_angle\"");
  REQUIRE(pos != std::string::npos);
  auto open = text.find('[', pos);
  auto close = text.find(']', open);
  text = text.substr(0, open) + "0.25" + text.substr(close + 1);
  NetworkCase back = case_from_json(text);
  bool seen = false;
  for (const Bus& b : back.buses)
    if (!b.pf_angle.empty() && b.pf_angle[0] == doctest::Approx(0.25)) {
      CHECK(b.pf_angle.size() == 24);
      for (double a : b.pf_angle) CHECK(a == doctest::Approx(0.25));
      seen = true;
      break;
    }
  CHECK(seen);
}
