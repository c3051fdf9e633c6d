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


#include "etsim/commands.hpp"

#include <array>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "etsim/code.hpp"
#include "etsim/dynamics.hpp"
#include "etsim/errors.hpp"
#include "etsim/experiments.hpp"
#include "etsim/log.hpp"
#include "etsim/recovery.hpp"

#ifndef ETSIM_VERSION
#define ETSIM_VERSION "0.0.0"
#endif

namespace etsim::commands {
namespace {

using config::Config;
using gates::GateKind;
using nlohmann::json;

constexpr double kHz = 1.0 / kTwoPi;  // rad/s -> Hz
constexpr double kPerUs = 1e6;        // s -> us

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(const std::string& v) { return v; }
std::string fmt(const char* v) { return v; }

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns)
      : path_(path), out_(path, std::ios::binary), columns_(std::move(columns)) {
    if (!out_) throw IoError("cannot write " + path.string());
    for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
    out_ << '\n';
  }

  template <typename... T>
  void row(const T&... v) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << fmt(v)), ...);
    out_ << '\n';
  }

  OutputFile close() {
    out_.close();
    if (!out_) throw IoError("error writing " + path_.string());
    return {path_.filename().string(), columns_};
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::vector<std::string> columns_;
};

OutputFile write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw IoError("error writing " + path.string());
  return {path.filename().string(), {}};
}

struct Context {
  const Config& cfg;
  const RunOptions& opt;
  std::vector<OutputFile> outputs;

  std::filesystem::path path(const char* file) const { return opt.out_dir / file; }
};

json drives_json(const std::vector<model::DriveSpec>& drives) {
  json a = json::array();
  for (const auto& d : drives) {
    a.push_back({{"rabi_over_2pi_hz", 2.0 * d.omega * kHz},
                 {"detuning_over_2pi_hz", d.delta_d * kHz}});
  }
  return a;
}

void run_pass_sweep(Context& ctx) {
  const auto& s = ctx.cfg.pass_sweep;
  const auto rows = experiments::pass_sweep(ctx.cfg.device, s.delta_d, s.rabi, s.n_trc);
  CsvWriter csv(ctx.path("pass_sweep.csv"),
                {"amplitude_over_2pi_hz", "n", "f_n_hz_exact", "f_n_hz_perturbative"});
  for (const auto& r : rows) {
    csv.row(r.rabi * kHz, r.n, r.f_exact * kHz, r.f_perturbative * kHz);
  }
  ctx.outputs.push_back(csv.close());
}

void run_et_verify(Context& ctx) {
  const auto& s = ctx.cfg.et_verify;
  const auto space = ctx.cfg.space();
  const auto code = code::binomial_code(space);
  json gates_json = json::array();
  for (GateKind kind : s.gates) {
    const auto gate = ctx.cfg.gate(kind);
    const auto r = experiments::et_verify(gate, code, s.jump_times, s.track_duration,
                                          s.ramsey_duration);
    json f = json::array();
    for (double v : r.fock_frequencies) f.push_back(v * kHz);
    json c_of_t = json::array();
    for (double v : r.et.c_of_t) c_of_t.push_back(v * kHz);
    gates_json.push_back({
        {"gate", gates::to_string(kind)},
        {"drives", drives_json(r.drives)},
        {"calibration_scales", r.scales},
        {"frame_offset_over_2pi_hz", r.frame_offset * kHz},
        {"fock_frequencies_hz", f},
        {"et_mismatch_hz", r.et_mismatch * kHz},
        {"idle_mismatch_hz", r.idle_mismatch * kHz},
        {"k_prime_hz", r.blocks.k_prime() * kHz},
        {"c_hz", r.blocks.c() * kHz},
        {"block_residual_hz", r.blocks.residual * kHz},
        {"et_satisfied", r.et.satisfied},
        {"et_worst_violation_hz", r.et.worst_violation * kHz},
        {"et_c_of_t_hz", c_of_t},
        {"commutator_violation", r.et.commutator_violation},
        {"jump_overlap_deviation", r.jump_overlap_deviation},
        {"jump_phase_slope_hz", r.jump_phase_slope * kHz},
        {"ramsey_code_frequency_hz", r.ramsey.code_frequency * kHz},
        {"ramsey_error_frequency_hz", r.ramsey.error_frequency * kHz},
    });
  }
  ctx.outputs.push_back(write_json(ctx.path("et_verify.json"), {{"gates", gates_json}}));
}

std::vector<gates::GateModel> build_gates(const Config& cfg, std::span<const GateKind> kinds) {
  std::vector<gates::GateModel> out;
  for (GateKind k : kinds) out.push_back(cfg.gate(k));
  return out;
}

void run_wigner(Context& ctx) {
  const auto& s = ctx.cfg.wigner;
  const auto code = code::binomial_code(ctx.cfg.space());
  const auto gates = build_gates(ctx.cfg, s.gates);
  const auto frames = experiments::wigner_evolution(gates, code, ctx.cfg.noise, s.times, s.grid,
                                                    ctx.cfg.dt, ctx.opt.threads);
  CsvWriter maps(ctx.path("wigner_evolution.csv"),
                 {"gate", "time_us", "branch", "x", "y", "w"});
  CsvWriter summary(ctx.path("wigner_summary.csv"),
                    {"gate", "time_us", "branch", "probability", "purity", "logical_phase_rad"});
  for (const auto& f : frames) {
    const char* g = gates::to_string(f.gate);
    summary.row(g, f.time * kPerUs, f.branch, f.probability, f.purity, f.logical_phase);
    for (int j = 0; j < f.map.grid.ny; ++j) {
      for (int i = 0; i < f.map.grid.nx; ++i) {
        maps.row(g, f.time * kPerUs, f.branch, f.map.grid.x(i), f.map.grid.y(j),
                 f.map.values(j, i));
      }
    }
  }
  ctx.outputs.push_back(maps.close());
  ctx.outputs.push_back(summary.close());
}

experiments::AqecOptions aqec_options(const Config& cfg, experiments::AqecMode mode,
                                      double duration,
                                      const std::optional<std::filesystem::path>& pulse_csv) {
  experiments::AqecOptions o{mode, duration, std::nullopt};
  if (!pulse_csv) return o;
  std::ifstream in(*pulse_csv, std::ios::binary);
  if (!in) throw IoError("cannot read AQEC pulse " + pulse_csv->string());
  recovery::ControlPulse pulse;
  try {
    pulse = recovery::ControlPulse::read_csv(in);
  } catch (const InvalidArgument& e) {
    throw ConfigError("gate_fidelity.aqec_pulse_csv: " + std::string(e.what()));
  }
  const auto code = code::binomial_code(cfg.space());
  const auto p = recovery::aqec_grape_problem(code, cfg.device, pulse.total_duration(),
                                              static_cast<int>(pulse.amplitudes.size()),
                                              cfg.aqec_pulse.amplitude_bound);
  std::vector<std::string> names;
  for (const auto& c : p.controls) names.push_back(c.name);
  if (pulse.channels != names) {
    throw ConfigError("gate_fidelity.aqec_pulse_csv: pulse channels do not match ancilla,cavity");
  }
  o.unitary = recovery::pulse_unitary(p, pulse);
  o.duration = pulse.total_duration();
  return o;
}

void run_gate_fidelity(Context& ctx) {
  const auto& s = ctx.cfg.gate_fidelity;
  const auto code = code::binomial_code(ctx.cfg.space());
  const auto aqec = aqec_options(ctx.cfg, s.mode, s.aqec_duration, s.pulse_csv);
  CsvWriter csv(ctx.path("gate_fidelity.csv"),
                {"gate", "aqec_mode", "T_G_us", "F_total", "F_code", "F_error", "p_no_error",
                 "phase_rad", "F_avg_total"});
  for (GateKind kind : s.gates) {
    const auto gate = ctx.cfg.gate(kind);
    const auto rows = experiments::gate_fidelity(gate, code, ctx.cfg.noise, s.t_gates, aqec,
                                                 ctx.cfg.dt, ctx.opt.threads);
    for (const auto& r : rows) {
      csv.row(gates::to_string(kind), experiments::to_string(s.mode), r.t_gate * kPerUs,
              r.f_total, r.f_code, r.f_error, r.p_no_error, r.phase,
              tomography::average_fidelity(r.f_total));
    }
  }
  ctx.outputs.push_back(csv.close());
}

void run_repetitive(Context& ctx) {
  const auto& s = ctx.cfg.repetitive;
  const auto code = code::binomial_code(ctx.cfg.space());
  const auto aqec = aqec_options(ctx.cfg, s.mode, s.aqec_duration, std::nullopt);
  CsvWriter series(ctx.path("repetitive.csv"),
                   {"gate", "aqec", "interval_us", "cycle", "time_us", "fidelity"});
  CsvWriter fits(ctx.path("repetitive_fits.csv"),
                 {"gate", "aqec", "interval_us", "lifetime_us", "floor", "amplitude",
                  "residual", "degenerate"});
  for (const auto& run : s.runs) {
    const auto gate = ctx.cfg.gate(run.gate);
    std::vector<bool> variants = {true};
    if (s.no_aqec) variants.push_back(false);
    for (bool with : variants) {
      const auto r = experiments::repetitive(gate, code, ctx.cfg.noise, run.interval, run.cycles,
                                             with, aqec, ctx.cfg.dt, ctx.opt.threads);
      const char* label = with ? experiments::to_string(s.mode) : "none";
      for (std::size_t k = 0; k < r.times.size(); ++k) {
        series.row(gates::to_string(run.gate), label, run.interval * kPerUs,
                   static_cast<int>(k), r.times[k] * kPerUs, r.fidelity[k]);
      }
      fits.row(gates::to_string(run.gate), label, run.interval * kPerUs,
               r.fit.lifetime * kPerUs, r.fit.floor, r.fit.amplitude, r.fit.residual,
               r.fit.degenerate ? 1 : 0);
    }
  }
  ctx.outputs.push_back(series.close());
  ctx.outputs.push_back(fits.close());
}

void run_excitation(Context& ctx) {
  const auto& s = ctx.cfg.excitation;
  const auto rows =
      experiments::excitation_sweep(ctx.cfg.device, ctx.cfg.noise, s.delta_d, s.rabi, s.fock,
                                    s.duration, ctx.cfg.dt, s.samples, ctx.opt.threads);
  CsvWriter csv(ctx.path("excitation_sweep.csv"),
                {"rabi_over_2pi_hz", "n", "p_excited", "p_drive"});
  for (const auto& r : rows) csv.row(r.rabi * kHz, r.n, r.p_excited, r.p_drive);
  ctx.outputs.push_back(csv.close());

  const auto& d = s.dephasing;
  if (d.trajectories == 0) return;
  CsvWriter deph(ctx.path("dephasing.csv"),
                 {"n", "gamma_predicted_per_s", "gamma_simulated_per_s", "ratio", "jumps"});
  for (int n : d.fock) {
    const auto c = experiments::dephasing_check(
        ctx.cfg.device, ctx.cfg.noise.params, d.drive, n, d.trajectories,
        dynamics::trajectory_seed(ctx.opt.seed, static_cast<std::uint64_t>(n)), std::nullopt,
        ctx.opt.threads);
    deph.row(n, c.predicted, c.simulated, c.simulated / c.predicted, c.jumps);
  }
  ctx.outputs.push_back(deph.close());
}

void run_aqec_pulse(Context& ctx) {
  const auto& s = ctx.cfg.aqec_pulse;
  const qcore::HilbertSpace space{s.cavity_dim};
  const auto code = code::binomial_code(space);
  const auto p = recovery::aqec_grape_problem(code, ctx.cfg.device, s.duration, s.segments,
                                              s.amplitude_bound,
                                              ctx.cfg.noise.params.kappa_a(), s.elapsed);
  recovery::GrapeOptions o;
  o.max_iter = s.max_iter;
  o.seed = ctx.opt.seed;
  o.target_infidelity = s.target_infidelity;
  const auto r = recovery::grape_optimize(p, o);
  if (!r.converged) {
    log_warning("GRAPE stopped at infidelity " + fmt(1.0 - r.fidelity));
  }
  {
    const auto path = ctx.path("aqec_pulse.csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    r.pulse.write_csv(out);
    out.close();
    if (!out) throw IoError("error writing " + path.string());
    ctx.outputs.push_back({"aqec_pulse.csv",
                           {"segment_index", "channel", "real", "imag", "segment_duration_s"}});
  }
  CsvWriter hist(ctx.path("aqec_pulse_history.csv"), {"iteration", "fidelity"});
  for (std::size_t k = 0; k < r.fidelity_history.size(); ++k) {
    hist.row(static_cast<int>(k), r.fidelity_history[k]);
  }
  ctx.outputs.push_back(hist.close());
}

using Runner = void (*)(Context&);

struct Entry {
  std::string_view name;
  Runner run;
};

constexpr std::array<Entry, 7> kCommands = {{
    {"pass-sweep", run_pass_sweep},
    {"et-verify", run_et_verify},
    {"wigner-evolution", run_wigner},
    {"gate-fidelity", run_gate_fidelity},
    {"repetitive", run_repetitive},
    {"excitation-sweep", run_excitation},
    {"aqec-pulse", run_aqec_pulse},
}};

constexpr std::array<std::string_view, 7> kNames = {
    kCommands[0].name, kCommands[1].name, kCommands[2].name, kCommands[3].name,
    kCommands[4].name, kCommands[5].name, kCommands[6].name};

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

void write_manifest(const RunOptions& opt, const RunManifest& m) {
  json outputs = json::array();
  for (const auto& o : m.outputs) {
    outputs.push_back({{"file", o.file}, {"columns", o.columns}});
  }
  write_json(opt.out_dir / "manifest.json",
             {{"command", m.command},
              {"version", m.version},
              {"config_hash", hex(m.config_hash)},
              {"seed", m.seed},
              {"threads", m.threads},
              {"wall_time_s", m.wall_time},
              {"outputs", outputs}});
}

}  // namespace

const char* version() { return ETSIM_VERSION; }

std::span<const std::string_view> command_names() { return kNames; }

RunManifest run_command(const Config& cfg, std::string_view command, const RunOptions& options) {
  const Entry* entry = nullptr;
  for (const auto& e : kCommands) {
    if (e.name == command) entry = &e;
  }
  if (entry == nullptr) throw InvalidArgument("unknown command '" + std::string(command) + "'");
  if (options.threads < 1) throw InvalidArgument("threads must be at least 1");

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) throw IoError("cannot create " + options.out_dir.string() + ": " + ec.message());

  const auto start = std::chrono::steady_clock::now();
  Context ctx{cfg, options, {}};
  entry->run(ctx);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  RunManifest m{std::string(command), version(), cfg.hash, options.seed, options.threads,
                elapsed.count(), std::move(ctx.outputs)};
  write_manifest(options, m);
  return m;
}

}  // namespace etsim::commands
