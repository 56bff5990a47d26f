#include "cldigdt/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cldigdt {

using nlohmann::json;

int NetworkCase::bus_pos(int bus_id) const {
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == bus_id) return static_cast<int>(i);
  throw CaseError("unknown bus id " + std::to_string(bus_id));
}

bool NetworkCase::has_bus(int bus_id) const {
  return std::any_of(buses.begin(), buses.end(),
                     [bus_id](const Bus& b) { return b.id == bus_id; });
}

std::vector<int> NetworkCase::pv_buses() const {
  std::vector<int> out;
  for (const Bus& b : buses)
    if (b.has_pv) out.push_back(b.id);
  return out;
}

Scenario Scenario::zeros(const NetworkCase& net) {
  Scenario s;
  s.pv.assign(net.buses.size(), std::vector<double>(static_cast<size_t>(net.time_steps), 0.0));
  s.load = s.pv;
  return s;
}

namespace {

bool radial_and_connected(const NetworkCase& net, std::string* why) {
  if (net.lines.size() + 1 != net.buses.size()) {
    *why = "radiality violated: " + std::to_string(net.lines.size()) + " lines for " +
           std::to_string(net.buses.size()) + " buses";
    return false;
  }
  std::set<int> ids;
  for (const Bus& b : net.buses) ids.insert(b.id);
  std::map<int, std::vector<int>> adj;
  for (const Line& l : net.lines) {
    if (!ids.count(l.from) || !ids.count(l.to)) {
      *why = "line endpoints reference unknown bus";
      return false;
    }
    adj[l.from].push_back(l.to);
    adj[l.to].push_back(l.from);
  }
  if (!ids.count(net.substation)) {
    *why = "substation bus not present";
    return false;
  }
  std::set<int> seen{net.substation};
  std::queue<int> q;
  q.push(net.substation);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u])
      if (seen.insert(v).second) q.push(v);
  }
  if (seen.size() != ids.size()) {
    *why = "network not connected from the substation";
    return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> validate_case(const NetworkCase& net) {
  std::vector<std::string> bad;
  auto flag = [&bad](const std::string& msg) { bad.push_back(msg); };

  if (net.time_steps < 1) flag("time_steps must be at least 1");
  std::set<int> ids;
  for (const Bus& b : net.buses) {
    if (!ids.insert(b.id).second) flag("duplicate bus id " + std::to_string(b.id));
    if (static_cast<int>(b.pf_angle.size()) != net.time_steps)
      flag("bus " + std::to_string(b.id) + ": power-factor angle vector length mismatch");
    for (double a : b.pf_angle)
      if (!(a > -M_PI_2 && a < M_PI_2))
        flag("bus " + std::to_string(b.id) + ": power-factor angle outside (-pi/2, pi/2)");
  }
  for (size_t k = 0; k < net.lines.size(); ++k) {
    const Line& l = net.lines[k];
    const std::string tag = "line " + std::to_string(l.from) + "-" + std::to_string(l.to);
    if (l.r < 0) flag(tag + ": negative resistance");
    if (l.x < 0) flag(tag + ": negative reactance");
    if (!(l.p_max > 0)) flag(tag + ": flow limit must be positive");
    if (!(l.loss_factor >= 0 && l.loss_factor < 1)) flag(tag + ": loss factor outside [0, 1)");
  }
  for (size_t k = 0; k < net.dgs.size(); ++k) {
    const DgUnit& g = net.dgs[k];
    const std::string tag = "dg " + std::to_string(k + 1);
    if (!net.has_bus(g.bus)) flag(tag + ": unknown bus");
    if (g.p_min > g.p_max) flag(tag + ": active power bounds inverted");
    if (g.recourse_p_min > g.recourse_p_max) flag(tag + ": recourse bounds inverted");
    if (g.q_min > g.q_max) flag(tag + ": reactive bounds inverted");
    if (g.ramp_up < 0 || g.ramp_down < 0) flag(tag + ": negative ramp limit");
    if (g.cost < 0 || g.recourse_cost < 0) flag(tag + ": negative cost");
  }
  for (size_t k = 0; k < net.esss.size(); ++k) {
    const EssUnit& e = net.esss[k];
    const std::string tag = "ess " + std::to_string(k + 1);
    if (!net.has_bus(e.bus)) flag(tag + ": unknown bus");
    if (!(e.efficiency > 0 && e.efficiency <= 1)) flag(tag + ": efficiency outside (0, 1]");
    if (e.energy_min > e.energy_max) flag(tag + ": energy bounds inverted");
    if (e.initial_energy < e.energy_min || e.initial_energy > e.energy_max)
      flag(tag + ": initial energy outside capacity bounds");
    if (e.charge_min < 0 || e.discharge_min < 0 || e.charge_max < e.charge_min ||
        e.discharge_max < e.discharge_min)
      flag(tag + ": power bounds must be nonnegative and ordered");
  }
  if (!(net.v_min_sq < net.v_max_sq)) flag("voltage bounds inverted");
  if (static_cast<int>(net.price_d.size()) != net.time_steps ||
      static_cast<int>(net.price_d_hat.size()) != net.time_steps)
    flag("price vectors must have one entry per time step");
  for (double p : net.price_d)
    if (p < 0) flag("negative first-stage price");
  for (double p : net.price_d_hat)
    if (p < 0) flag("negative second-stage price");
  if (net.pv_cap < 0) flag("negative pv capacity");

  std::string why;
  if (!radial_and_connected(net, &why)) flag(why);
  return bad;
}

namespace {

std::vector<double> read_angle(const json& j, int steps) {
  std::vector<double> a;
  if (j.is_number()) {
    a.assign(static_cast<size_t>(steps), j.get<double>());
  } else {
    a = j.get<std::vector<double>>();
  }
  return a;
}

}  // namespace

NetworkCase case_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CaseError(std::string("case parse failure: ") + e.what());
  }
  NetworkCase net;
  try {
    net.time_steps = j.at("time").at("steps").get<int>();
    net.dt_hours = j.at("time").at("dt_hours").get<double>();
    net.substation = j.at("substation").get<int>();
    net.pv_cap = j.at("pv_cap").get<double>();
    net.v_min_sq = j.at("voltage").at("v_min_sq").get<double>();
    net.v_max_sq = j.at("voltage").at("v_max_sq").get<double>();
    net.price_d = j.at("prices").at("d").get<std::vector<double>>();
    net.price_d_hat = j.at("prices").at("d_hat").get<std::vector<double>>();
    for (const json& jb : j.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.has_pv = jb.value("has_pv", false);
      b.pf_angle = jb.contains("pf_angle")
                       ? read_angle(jb.at("pf_angle"), net.time_steps)
                       : std::vector<double>(static_cast<size_t>(net.time_steps), 0.3);
      net.buses.push_back(std::move(b));
    }
    for (const json& jl : j.at("lines")) {
      Line l;
      l.from = jl.at("from").get<int>();
      l.to = jl.at("to").get<int>();
      l.r = jl.at("r").get<double>();
      l.x = jl.at("x").get<double>();
      l.p_max = jl.at("p_max").get<double>();
      l.loss_factor = jl.value("phi", 0.02);
      net.lines.push_back(l);
    }
    for (const json& jg : j.at("dgs")) {
      DgUnit g;
      g.bus = jg.at("bus").get<int>();
      g.p_max = jg.at("p_max").get<double>();
      g.p_min = jg.at("p_min").get<double>();
      g.ramp_up = jg.at("ramp_up").get<double>();
      g.ramp_down = jg.at("ramp_down").get<double>();
      g.recourse_p_max = jg.at("recourse_p_max").get<double>();
      g.recourse_p_min = jg.at("recourse_p_min").get<double>();
      g.q_max = jg.at("q_max").get<double>();
      g.q_min = jg.at("q_min").get<double>();
      g.cost = jg.at("cost").get<double>();
      g.recourse_cost = jg.at("recourse_cost").get<double>();
      net.dgs.push_back(g);
    }
    for (const json& je : j.at("esss")) {
      EssUnit e;
      e.bus = je.at("bus").get<int>();
      e.charge_max = je.at("charge_max").get<double>();
      e.charge_min = je.value("charge_min", 0.0);
      e.discharge_max = je.at("discharge_max").get<double>();
      e.discharge_min = je.value("discharge_min", 0.0);
      e.energy_max = je.at("energy_max").get<double>();
      e.energy_min = je.at("energy_min").get<double>();
      e.efficiency = je.at("efficiency").get<double>();
      e.initial_energy = je.at("initial_energy").get<double>();
      net.esss.push_back(e);
    }
  } catch (const json::exception& e) {
    throw CaseError(std::string("case schema violation: ") + e.what());
  }
  auto bad = validate_case(net);
  if (!bad.empty()) {
    std::ostringstream os;
    os << "case validation failed:";
    for (const auto& m : bad) os << "\n  " << m;
    throw CaseError(os.str());
  }
  return net;
}

NetworkCase load_network_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CaseError("cannot open case file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return case_from_json(buf.str());
}

std::string case_to_json(const NetworkCase& net) {
  json j;
  j["time"] = {{"steps", net.time_steps}, {"dt_hours", net.dt_hours}};
  j["substation"] = net.substation;
  j["pv_cap"] = net.pv_cap;
  j["voltage"] = {{"v_min_sq", net.v_min_sq}, {"v_max_sq", net.v_max_sq}};
  j["prices"] = {{"d", net.price_d}, {"d_hat", net.price_d_hat}};
  j["buses"] = json::array();
  for (const Bus& b : net.buses)
    j["buses"].push_back({{"id", b.id}, {"has_pv", b.has_pv}, {"pf_angle", b.pf_angle}});
  j["lines"] = json::array();
  for (const Line& l : net.lines)
    j["lines"].push_back({{"from", l.from},
                          {"to", l.to},
                          {"r", l.r},
                          {"x", l.x},
                          {"p_max", l.p_max},
                          {"phi", l.loss_factor}});
  j["dgs"] = json::array();
  for (const DgUnit& g : net.dgs)
    j["dgs"].push_back({{"bus", g.bus},
                        {"p_max", g.p_max},
                        {"p_min", g.p_min},
                        {"ramp_up", g.ramp_up},
                        {"ramp_down", g.ramp_down},
                        {"recourse_p_max", g.recourse_p_max},
                        {"recourse_p_min", g.recourse_p_min},
                        {"q_max", g.q_max},
                        {"q_min", g.q_min},
                        {"cost", g.cost},
                        {"recourse_cost", g.recourse_cost}});
  j["esss"] = json::array();
  for (const EssUnit& e : net.esss)
    j["esss"].push_back({{"bus", e.bus},
                         {"charge_max", e.charge_max},
                         {"charge_min", e.charge_min},
                         {"discharge_max", e.discharge_max},
                         {"discharge_min", e.discharge_min},
                         {"energy_max", e.energy_max},
                         {"energy_min", e.energy_min},
                         {"efficiency", e.efficiency},
                         {"initial_energy", e.initial_energy}});
  return j.dump(2);
}

void save_network_case(const NetworkCase& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CaseError("cannot open output file: " + path);
  out << case_to_json(net) << "\n";
}

namespace {

struct BranchRow {
  int from, to;
  double r_ohm, x_ohm;
};

// Baran & Wu 33-bus feeder, 12.66 kV base.
constexpr BranchRow kBranches[] = {
    {1, 2, 0.0922, 0.0470},   {2, 3, 0.4930, 0.2511},   {3, 4, 0.3660, 0.1864},
    {4, 5, 0.3811, 0.1941},   {5, 6, 0.8190, 0.7070},   {6, 7, 0.1872, 0.6188},
    {7, 8, 0.7114, 0.2351},   {8, 9, 1.0300, 0.7400},   {9, 10, 1.0440, 0.7400},
    {10, 11, 0.1966, 0.0650}, {11, 12, 0.3744, 0.1238}, {12, 13, 1.4680, 1.1550},
    {13, 14, 0.5416, 0.7129}, {14, 15, 0.5910, 0.5260}, {15, 16, 0.7463, 0.5450},
    {16, 17, 1.2890, 1.7210}, {17, 18, 0.7320, 0.5740}, {2, 19, 0.1640, 0.1565},
    {19, 20, 1.5042, 1.3554}, {20, 21, 0.4095, 0.4784}, {21, 22, 0.7089, 0.9373},
    {3, 23, 0.4512, 0.3083},  {23, 24, 0.8980, 0.7091}, {24, 25, 0.8960, 0.7011},
    {6, 26, 0.2030, 0.1034},  {26, 27, 0.2842, 0.1447}, {27, 28, 1.0590, 0.9337},
    {28, 29, 0.8042, 0.7006}, {29, 30, 0.5075, 0.2585}, {30, 31, 0.9744, 0.9630},
    {31, 32, 0.3105, 0.3619}, {32, 33, 0.3410, 0.5302},
};

struct LoadRow {
  int bus;
  double p_kw, q_kvar;
};

constexpr LoadRow kLoads[] = {
    {2, 100, 60},  {3, 90, 40},   {4, 120, 80},  {5, 60, 30},   {6, 60, 20},   {7, 200, 100},
    {8, 200, 100}, {9, 60, 20},   {10, 60, 20},  {11, 45, 30},  {12, 60, 35},  {13, 60, 35},
    {14, 120, 80}, {15, 60, 10},  {16, 60, 20},  {17, 60, 20},  {18, 90, 40},  {19, 90, 40},
    {20, 90, 40},  {21, 90, 40},  {22, 90, 40},  {23, 90, 50},  {24, 420, 200}, {25, 420, 200},
    {26, 60, 25},  {27, 60, 25},  {28, 60, 20},  {29, 120, 70}, {30, 200, 600}, {31, 150, 70},
    {32, 210, 100}, {33, 60, 40},
};

constexpr double kVBaseKv = 12.66;

}  // namespace

NetworkCase ieee33_case() {
  NetworkCase net;
  net.time_steps = 24;
  net.dt_hours = 1.0;
  net.substation = 1;
  net.pv_cap = 400.0;
  net.v_min_sq = 0.95 * 0.95;
  net.v_max_sq = 1.05 * 1.05;

  // Time-of-use purchase prices, $/kW per hourly step.
  net.price_d = {4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 5.0, 5.0, 5.0, 5.5, 5.5,
                 5.5, 5.5, 5.5, 5.5, 7.0, 7.0, 7.0, 7.0, 7.0, 7.0, 4.5, 4.5};
  net.price_d_hat.resize(24);
  for (int t = 0; t < 24; ++t) net.price_d_hat[static_cast<size_t>(t)] = 1.25 * net.price_d[static_cast<size_t>(t)];

  const std::set<int> pv_at = {9, 16, 22, 29};
  for (int id = 1; id <= 33; ++id) {
    Bus b;
    b.id = id;
    b.has_pv = pv_at.count(id) > 0;
    double angle = 0.0;
    for (const LoadRow& lr : kLoads)
      if (lr.bus == id) angle = std::atan2(lr.q_kvar, lr.p_kw);
    b.pf_angle.assign(24, angle);
    net.buses.push_back(std::move(b));
  }

  // Voltage drop coefficients: 2 * R[ohm] * 1e3 / (Vbase[V])^2 per kW,
  // so that v (in pu^2) drops linearly with branch kW / kvar flow.
  const double vbase_sq = kVBaseKv * 1e3 * kVBaseKv * 1e3;
  const std::set<int> trunk = {2, 3, 4, 5, 6};  // "to" bus of the first feeder sections
  for (const BranchRow& br : kBranches) {
    Line l;
    l.from = br.from;
    l.to = br.to;
    l.r = 2.0 * br.r_ohm * 1e3 / vbase_sq;
    l.x = 2.0 * br.x_ohm * 1e3 / vbase_sq;
    l.p_max = trunk.count(br.to) ? 3000.0 : 1500.0;
    l.loss_factor = 0.02;
    net.lines.push_back(l);
  }

  // DG data (Table-style): label, bus, p_max, p_min, RU, RD, q_max, q_min, c.
  // Recourse band is +-RU around the first-stage setpoint, priced at 1.2 c.
  auto dg = [](int bus, double pmax, double pmin, double ru, double rd, double qmax, double qmin,
               double c) {
    DgUnit g;
    g.bus = bus;
    g.p_max = pmax;
    g.p_min = pmin;
    g.ramp_up = ru;
    g.ramp_down = rd;
    g.recourse_p_max = ru;
    g.recourse_p_min = -ru;
    g.q_max = qmax;
    g.q_min = qmin;
    g.cost = c;
    g.recourse_cost = 1.2 * c;
    return g;
  };
  net.dgs = {dg(30, 600, 100, 100, 100, 500, -400, 4.0), dg(25, 400, 100, 90, 90, 300, -200, 3.5),
             dg(13, 250, 80, 60, 60, 200, -150, 2.5), dg(18, 50, 10, 15, 15, 40, -25, 2.0)};

  auto ess = [](int bus, double p, double emax, double emin) {
    EssUnit e;
    e.bus = bus;
    e.charge_max = p;
    e.discharge_max = p;
    e.energy_max = emax;
    e.energy_min = emin;
    e.efficiency = 0.9;
    e.initial_energy = 0.5 * (emax + emin);
    return e;
  };
  net.esss = {ess(7, 120, 600, 120), ess(14, 40, 200, 40), ess(24, 60, 300, 60),
              ess(32, 80, 400, 80)};
  return net;
}

}  // namespace cldigdt
