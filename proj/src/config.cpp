// Copyright 2026 The etsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "etsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "etsim/errors.hpp"

namespace etsim::config {
namespace {

using nlohmann::json;

constexpr double kUs = 1e-6;

// Reads one JSON object, tracking which keys were consumed so leftovers can
// be reported with their full path.
class Node {
 public:
  Node(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ != nullptr && !j_->is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_ != nullptr && j_->contains(key); }

  Node child(const std::string& key) {
    used_.insert(key);
    return {has(key) ? &j_->at(key) : nullptr, join(key)};
  }

  const json* raw(const std::string& key) {
    used_.insert(key);
    return has(key) ? &j_->at(key) : nullptr;
  }

  double number(const std::string& key, double fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ConfigError(join(key) + ": expected a number");
    return v->get<double>();
  }

  double required_number(const std::string& key) {
    if (!has(key)) throw ConfigError(join(key) + ": missing required key");
    return number(key, 0.0);
  }

  int integer(const std::string& key, int fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) throw ConfigError(join(key) + ": expected an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError(join(key) + ": expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError(join(key) + ": expected a string");
    return v->get<std::string>();
  }

  // A list of numbers, or {"start", "stop", "count"} for an even grid.
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    const std::string p = join(key);
    if (v->is_object()) {
      Node r(v, p);
      const double start = r.required_number("start");
      const double stop = r.required_number("stop");
      const int count = r.integer("count", 0);
      r.finish();
      if (count < 1) throw ConfigError(p + ".count: must be at least 1");
      std::vector<double> out(count);
      for (int i = 0; i < count; ++i) {
        out[i] = count == 1 ? start : start + (stop - start) * i / (count - 1);
      }
      return out;
    }
    if (!v->is_array()) throw ConfigError(p + ": expected a list or a range object");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) {
        throw ConfigError(p + "[" + std::to_string(i) + "]: expected a number");
      }
      out.push_back((*v)[i].get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    const std::string p = join(key);
    if (!v->is_array()) throw ConfigError(p + ": expected a list of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number_integer()) {
        throw ConfigError(p + "[" + std::to_string(i) + "]: expected an integer");
      }
      out.push_back((*v)[i].get<int>());
    }
    return out;
  }

  std::vector<Node> objects(const std::string& key) {
    const json* v = raw(key);
    std::vector<Node> out;
    if (v == nullptr) return out;
    if (!v->is_array()) throw ConfigError(join(key) + ": expected a list of objects");
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.emplace_back(&(*v)[i], join(key) + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  void finish() const {
    if (j_ == nullptr) return;
    for (const auto& [key, value] : j_->items()) {
      if (!used_.contains(key)) throw ConfigError(join(key) + ": unknown key");
    }
  }

  const std::string& path() const { return path_; }
  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_positive(double v, const std::string& path) {
  require(v > 0.0, path + ": must be positive");
}

void check_ascending(const std::vector<double>& v, const std::string& path) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    require(v[i] >= v[i - 1], path + ": must be in ascending order");
  }
}

void check_nonnegative(const std::vector<double>& v, const std::string& path) {
  for (double x : v) require(x >= 0.0, path + ": values must be non-negative");
}

std::vector<GateKind> parse_gates(Node& n, const std::string& key,
                                  std::vector<GateKind> fallback) {
  const json* v = n.raw(key);
  if (v == nullptr) return fallback;
  const std::string p = n.join(key);
  require(v->is_array(), p + ": expected a list of gate names");
  std::vector<GateKind> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const std::string item = p + "[" + std::to_string(i) + "]";
    require((*v)[i].is_string(), item + ": expected a gate name");
    try {
      out.push_back(gates::parse_gate((*v)[i].get<std::string>()));
    } catch (const InvalidArgument& e) {
      throw ConfigError(item + ": " + e.what());
    }
  }
  return out;
}

experiments::AqecMode parse_mode(Node& n, const std::string& key,
                                 experiments::AqecMode fallback) {
  if (!n.has(key)) {
    n.raw(key);
    return fallback;
  }
  const std::string s = n.string(key, "");
  try {
    return experiments::parse_aqec_mode(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(n.join(key) + ": " + e.what());
  }
}

model::DriveSpec parse_drive(Node d, double chi) {
  const double rabi = d.required_number("rabi_over_chi");
  const double delta = d.required_number("detuning_over_chi");
  d.finish();
  require(rabi >= 0.0, d.path() + ".rabi_over_chi: must be non-negative");
  return model::from_rabi(rabi * chi, delta * chi);
}

std::vector<model::DriveSpec> scaled_drives(const std::vector<model::DriveSpec>& reference,
                                            double chi) {
  const double ref_chi = model::reference_device().chi;
  std::vector<model::DriveSpec> out;
  for (const auto& d : reference) out.push_back({d.omega / ref_chi * chi, d.delta_d / ref_chi * chi});
  return out;
}

void parse_device(Node n, Config& c) {
  const auto ref = model::reference_device();
  c.device.chi = kTwoPi * n.number("chi_over_2pi_hz", ref.chi / kTwoPi);
  c.device.kerr = kTwoPi * n.number("kerr_over_2pi_hz", ref.kerr / kTwoPi);
  c.device.anharmonicity =
      kTwoPi * n.number("anharmonicity_over_2pi_hz", ref.anharmonicity / kTwoPi);
  c.cavity_dim = n.integer("cavity_dim", c.cavity_dim);
  n.finish();
  require(c.cavity_dim >= 6, n.join("cavity_dim") + ": must be at least 6");
  require(c.cavity_dim <= 40, n.join("cavity_dim") + ": must be at most 40");
  c.device.validate();
}

void parse_noise(Node n, Config& c) {
  const auto ref = model::reference_noise();
  auto& p = c.noise.params;
  p.cavity_t1 = n.number("cavity_t1_s", ref.cavity_t1);
  p.cavity_tphi = n.number("cavity_tphi_s", ref.cavity_tphi);
  p.qubit_t1 = n.number("qubit_t1_s", ref.qubit_t1);
  p.qubit_tphi = n.number("qubit_tphi_s", ref.qubit_tphi);
  p.n_th = n.number("n_th", ref.n_th);
  p.readout_flip = n.number("readout_flip", ref.readout_flip);
  p.reset_fail = n.number("reset_fail", ref.reset_fail);
  Node ch = n.child("channels");
  auto& k = c.noise.channels;
  k.cavity_loss = ch.boolean("cavity_loss", k.cavity_loss);
  k.cavity_dephasing = ch.boolean("cavity_dephasing", k.cavity_dephasing);
  k.qubit_decay = ch.boolean("qubit_decay", k.qubit_decay);
  k.qubit_thermal = ch.boolean("qubit_thermal", k.qubit_thermal);
  k.qubit_dephasing = ch.boolean("qubit_dephasing", k.qubit_dephasing);
  ch.finish();
  n.finish();
  p.validate();
}

void parse_drives(Node n, Config& c) {
  const double chi = c.device.chi;
  c.drives[GateKind::kKerr] = {};
  c.drives[GateKind::kEtPhase] = scaled_drives(model::reference_phase_drives(), chi);
  c.drives[GateKind::kEtIdle] = scaled_drives(model::reference_idle_drives(), chi);
  c.calibrate = n.boolean("calibrate", c.calibrate);
  const std::string sw = n.string("switching", gates::to_string(c.switching));
  try {
    c.switching = gates::parse_switching(sw);
  } catch (const InvalidArgument& e) {
    throw ConfigError(n.join("switching") + ": " + e.what());
  }
  for (GateKind g : {GateKind::kEtPhase, GateKind::kEtIdle}) {
    const std::string key = gates::to_string(g);
    if (!n.has(key)) {
      n.raw(key);
      continue;
    }
    std::vector<model::DriveSpec> list;
    for (auto& d : n.objects(key)) list.push_back(parse_drive(std::move(d), chi));
    c.drives[g] = list;
  }
  n.finish();
}

void parse_pass_sweep(Node n, Config& c) {
  auto& s = c.pass_sweep;
  const double chi = c.device.chi;
  s.delta_d = chi * n.number("detuning_over_chi", -3.5);
  std::vector<double> rabi_hz;
  for (int i = 0; i <= 40; ++i) rabi_hz.push_back(1e4 * i);
  rabi_hz = n.numbers("rabi_over_2pi_hz", rabi_hz);
  s.n_trc = n.integer("n_trc", s.n_trc);
  n.finish();
  check_nonnegative(rabi_hz, n.join("rabi_over_2pi_hz"));
  require(!rabi_hz.empty(), n.join("rabi_over_2pi_hz") + ": must not be empty");
  require(s.n_trc >= 1 && s.n_trc < c.cavity_dim, n.join("n_trc") + ": out of range");
  s.rabi.clear();
  for (double r : rabi_hz) s.rabi.push_back(kTwoPi * r);
}

const std::vector<GateKind> kAllGates = {GateKind::kKerr, GateKind::kEtPhase, GateKind::kEtIdle};

void parse_et_verify(Node n, Config& c) {
  auto& s = c.et_verify;
  s.gates = parse_gates(n, "gates", kAllGates);
  s.jump_times = n.numbers("jump_times_s", {0.0, 15 * kUs, 30 * kUs, 45 * kUs, 60 * kUs,
                                            75 * kUs, 90 * kUs});
  s.track_duration = n.number("track_duration_s", s.track_duration);
  s.ramsey_duration = n.number("ramsey_duration_s", s.ramsey_duration);
  n.finish();
  check_nonnegative(s.jump_times, n.join("jump_times_s"));
  check_positive(s.track_duration, n.join("track_duration_s"));
  check_positive(s.ramsey_duration, n.join("ramsey_duration_s"));
}

tomography::WignerGrid parse_grid(Node n) {
  tomography::WignerGrid g;
  g.x_min = n.number("x_min", g.x_min);
  g.x_max = n.number("x_max", g.x_max);
  g.y_min = n.number("y_min", g.y_min);
  g.y_max = n.number("y_max", g.y_max);
  g.nx = n.integer("nx", g.nx);
  g.ny = n.integer("ny", g.ny);
  n.finish();
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(n.path() + ": " + e.what());
  }
  return g;
}

void parse_wigner(Node n, Config& c) {
  auto& s = c.wigner;
  s.gates = parse_gates(n, "gates", kAllGates);
  s.times = n.numbers("times_s", {0.0, 30 * kUs, 60 * kUs, 90 * kUs});
  s.grid = parse_grid(n.child("grid"));
  n.finish();
  check_nonnegative(s.times, n.join("times_s"));
  check_ascending(s.times, n.join("times_s"));
}

void parse_gate_fidelity(Node n, Config& c, const std::filesystem::path& base) {
  auto& s = c.gate_fidelity;
  s.gates = parse_gates(n, "gates", {GateKind::kKerr, GateKind::kEtPhase});
  std::vector<double> tg;
  for (int i = 0; i <= 6; ++i) tg.push_back(10 * kUs * i);
  s.t_gates = n.numbers("t_gate_s", tg);
  s.mode = parse_mode(n, "aqec_mode", s.mode);
  s.aqec_duration = n.number("aqec_duration_s", s.aqec_duration);
  const std::string csv = n.string("aqec_pulse_csv", "");
  n.finish();
  check_nonnegative(s.t_gates, n.join("t_gate_s"));
  check_positive(s.aqec_duration, n.join("aqec_duration_s"));
  if (!csv.empty()) {
    std::filesystem::path p(csv);
    s.pulse_csv = p.is_absolute() || base.empty() ? p : base / p;
  }
}

void parse_repetitive(Node n, Config& c) {
  auto& s = c.repetitive;
  const auto runs = n.objects("runs");
  if (n.has("runs")) {
    s.runs.clear();
    for (auto r : runs) {
      RepetitiveRun run;
      const std::string g = r.string("gate", "");
      try {
        run.gate = gates::parse_gate(g);
      } catch (const InvalidArgument& e) {
        throw ConfigError(r.join("gate") + ": " + e.what());
      }
      run.interval = r.required_number("interval_s");
      run.cycles = r.integer("cycles", 10);
      r.finish();
      check_positive(run.interval, r.join("interval_s"));
      require(run.cycles >= 3, r.join("cycles") + ": must be at least 3");
      s.runs.push_back(run);
    }
  } else {
    s.runs = {{GateKind::kKerr, 60 * kUs, 20},
              {GateKind::kEtPhase, 120 * kUs, 10},
              {GateKind::kEtIdle, 120 * kUs, 10}};
  }
  s.no_aqec = n.boolean("no_aqec", s.no_aqec);
  s.mode = parse_mode(n, "aqec_mode", s.mode);
  s.aqec_duration = n.number("aqec_duration_s", s.aqec_duration);
  n.finish();
  check_positive(s.aqec_duration, n.join("aqec_duration_s"));
  for (const auto& r : s.runs) {
    require(r.interval > s.aqec_duration,
            n.join("runs") + ": interval_s must exceed aqec_duration_s");
  }
}

void parse_excitation(Node n, Config& c) {
  auto& s = c.excitation;
  const double chi = c.device.chi;
  s.delta_d = chi * n.number("detuning_over_chi", -2.5);
  std::vector<double> rabi_hz;
  for (int i = 0; i <= 8; ++i) rabi_hz.push_back(2.5e4 * i);
  rabi_hz = n.numbers("rabi_over_2pi_hz", rabi_hz);
  s.fock = n.integers("fock", {0, 1, 2, 3, 4});
  s.duration = n.number("duration_s", s.duration);
  s.samples = n.integer("samples", s.samples);
  Node d = n.child("dephasing");
  s.dephasing.trajectories = d.integer("trajectories", 400);
  const double rabi = d.number("rabi_over_chi", 0.074);
  const double delta = d.number("detuning_over_chi", -3.41);
  s.dephasing.fock = d.integers("fock", {0, 1, 2, 3, 4});
  d.finish();
  n.finish();
  check_nonnegative(rabi_hz, n.join("rabi_over_2pi_hz"));
  check_positive(s.duration, n.join("duration_s"));
  require(s.samples >= 2, n.join("samples") + ": must be at least 2");
  for (int k : s.fock) {
    require(k >= 0 && k < c.cavity_dim, n.join("fock") + ": level outside the cavity space");
  }
  require(s.dephasing.trajectories >= 0, d.join("trajectories") + ": must be non-negative");
  require(rabi > 0.0, d.join("rabi_over_chi") + ": must be positive");
  for (int k : s.dephasing.fock) {
    require(k >= 0 && k < c.cavity_dim, d.join("fock") + ": level outside the cavity space");
  }
  s.rabi.clear();
  for (double r : rabi_hz) s.rabi.push_back(kTwoPi * r);
  s.dephasing.drive = model::from_rabi(rabi * chi, delta * chi);
}

void parse_aqec_pulse(Node n, Config& c) {
  auto& s = c.aqec_pulse;
  s.cavity_dim = n.integer("cavity_dim", c.cavity_dim);
  s.duration = n.number("duration_s", s.duration);
  s.segments = n.integer("segments", s.segments);
  s.amplitude_bound = kTwoPi * n.number("amplitude_bound_over_2pi_hz", s.amplitude_bound / kTwoPi);
  s.max_iter = n.integer("max_iter", s.max_iter);
  s.target_infidelity = n.number("target_infidelity", s.target_infidelity);
  s.elapsed = n.number("elapsed_s", s.elapsed);
  n.finish();
  require(s.elapsed >= 0.0, n.join("elapsed_s") + ": must be non-negative");
  require(s.cavity_dim >= 6, n.join("cavity_dim") + ": must be at least 6");
  check_positive(s.duration, n.join("duration_s"));
  require(s.segments >= 20, n.join("segments") + ": must be at least 20");
  check_positive(s.amplitude_bound, n.join("amplitude_bound_over_2pi_hz"));
  require(s.max_iter >= 1, n.join("max_iter") + ": must be at least 1");
  require(s.target_infidelity > 0.0, n.join("target_infidelity") + ": must be positive");
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

gates::GateModel Config::gate(GateKind kind) const {
  return gates::make_gate(kind, space(), device, drives.at(kind), calibrate, switching);
}

Config parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  Config c;
  Node root(&doc, "");
  const int version = root.integer("version", 1);
  require(version == 1, "version: unsupported config version " + std::to_string(version));
  root.string("description", "");
  parse_device(root.child("device"), c);
  parse_noise(root.child("noise"), c);
  parse_drives(root.child("drives"), c);
  {
    Node sim = root.child("simulation");
    c.dt = sim.number("dt_s", c.dt);
    sim.finish();
    check_positive(c.dt, "simulation.dt_s");
    require(c.dt <= 1e-7, "simulation.dt_s: must be at most 1e-7");
  }
  parse_pass_sweep(root.child("pass_sweep"), c);
  parse_et_verify(root.child("et_verify"), c);
  parse_wigner(root.child("wigner_evolution"), c);
  parse_gate_fidelity(root.child("gate_fidelity"), c, base_dir);
  parse_repetitive(root.child("repetitive"), c);
  parse_excitation(root.child("excitation_sweep"), c);
  parse_aqec_pulse(root.child("aqec_pulse"), c);
  root.finish();

  // Drives must avoid the ancilla resonances before any scenario runs.
  for (const auto& [kind, list] : c.drives) model::check_drives(c.device, list);

  c.canonical = doc.dump();
  c.hash = fnv1a64(c.canonical);
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

}  // namespace etsim::config
