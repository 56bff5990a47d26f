#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cldigdt {

struct Bus {
  int id = 0;
  bool has_pv = false;
  std::vector<double> pf_angle;  // radians, one entry per time step
};

/// Line parameters. r and x are the linearized voltage-drop coefficients in
/// per-unit-squared volts per kW (resp. kvar) of branch flow, i.e. already
/// divided by the squared voltage base.
struct Line {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double p_max = 0.0;      // kW flow limit, symmetric
  double loss_factor = 0;  // phi in [0, 1)
};

struct DgUnit {
  int bus = 0;
  double p_max = 0.0, p_min = 0.0;                  // kW
  double ramp_up = 0.0, ramp_down = 0.0;            // kW per step
  double recourse_p_max = 0.0, recourse_p_min = 0;  // kW, signed adjustment
  double q_max = 0.0, q_min = 0.0;                  // kvar
  double cost = 0.0;                                // $/kW, first stage
  double recourse_cost = 0.0;                       // $/kW, second stage
};

struct EssUnit {
  int bus = 0;
  double charge_max = 0.0, charge_min = 0.0;        // kW
  double discharge_max = 0.0, discharge_min = 0.0;  // kW
  double energy_max = 0.0, energy_min = 0.0;        // kWh
  double efficiency = 1.0;
  double initial_energy = 0.0;  // kWh
};

struct NetworkCase {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<DgUnit> dgs;
  std::vector<EssUnit> esss;
  int time_steps = 0;
  double dt_hours = 1.0;
  double v_min_sq = 0.9025;  // 0.95^2
  double v_max_sq = 1.1025;  // 1.05^2
  int substation = 1;
  std::vector<double> price_d;      // $/kW per step, first stage
  std::vector<double> price_d_hat;  // $/kW per step, second stage
  double pv_cap = 0.0;              // kW

  int bus_pos(int bus_id) const;
  bool has_bus(int bus_id) const;
  std::vector<int> pv_buses() const;
};

/// One realization (or forecast) of the uncertain inputs, indexed
/// [bus position][time step]. pv is zero at buses without panels.
struct Scenario {
  std::vector<std::vector<double>> pv;
  std::vector<std::vector<double>> load;

  static Scenario zeros(const NetworkCase& net);
};

struct CaseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every violated type invariant, one message each. Empty means valid.
std::vector<std::string> validate_case(const NetworkCase& net);

NetworkCase load_network_case(const std::string& path);
void save_network_case(const NetworkCase& net, const std::string& path);
std::string case_to_json(const NetworkCase& net);
NetworkCase case_from_json(const std::string& text);

/// Built-in modified IEEE 33-bus case: 4 DGs, 4 ESSs, 4 PV buses,
/// 24 hourly steps.
NetworkCase ieee33_case();

}  // namespace cldigdt
