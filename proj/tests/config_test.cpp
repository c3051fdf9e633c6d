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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "etsim/commands.hpp"
#include "etsim/errors.hpp"

namespace etsim::config {
namespace {

namespace fs = std::filesystem;

const fs::path kReference = fs::path(ETSIM_SOURCE_DIR) / "configs" / "reference.json";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("etsim_config_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string error_of(const std::string& json) {
  try {
    parse_config(json);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "<no ConfigError>";
}

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Config, EmptyDocumentUsesReferenceValues) {
  const Config c = parse_config("{}");
  EXPECT_DOUBLE_EQ(c.device.chi, model::reference_device().chi);
  EXPECT_DOUBLE_EQ(c.device.kerr, model::reference_device().kerr);
  EXPECT_DOUBLE_EQ(c.noise.params.cavity_t1, model::reference_noise().cavity_t1);
  EXPECT_DOUBLE_EQ(c.noise.params.n_th, model::reference_noise().n_th);
  EXPECT_TRUE(c.noise.channels.cavity_dephasing);
  EXPECT_EQ(c.drives.at(GateKind::kEtPhase), model::reference_phase_drives());
  EXPECT_EQ(c.drives.at(GateKind::kEtIdle), model::reference_idle_drives());
  EXPECT_TRUE(c.drives.at(GateKind::kKerr).empty());
  EXPECT_EQ(c.cavity_dim, 8);
  EXPECT_DOUBLE_EQ(c.dt, 5e-10);
  EXPECT_EQ(c.repetitive.runs.size(), 3u);
  EXPECT_EQ(c.aqec_pulse.cavity_dim, c.cavity_dim);
}

TEST(Config, ReferenceFileMatchesDefaults) {
  const Config file = load_config(kReference);
  const Config defaults = parse_config("{}");
  EXPECT_DOUBLE_EQ(file.device.chi, defaults.device.chi);
  EXPECT_EQ(file.drives.at(GateKind::kEtPhase).size(), 1u);
  EXPECT_NEAR(file.drives.at(GateKind::kEtPhase)[0].omega,
              defaults.drives.at(GateKind::kEtPhase)[0].omega, 1e-6);
  EXPECT_EQ(file.pass_sweep.rabi.size(), 41u);
  EXPECT_NEAR(file.pass_sweep.rabi.back(), kTwoPi * 4e5, 1e-6);
  EXPECT_EQ(file.gate_fidelity.t_gates.size(), 7u);
  EXPECT_NEAR(file.gate_fidelity.t_gates[6], 60e-6, 1e-18);
  EXPECT_EQ(file.wigner.times.size(), 4u);
}

TEST(Config, DrivesInUnitsOfChi) {
  const Config c = parse_config(R"({
    "device": {"chi_over_2pi_hz": 2e6, "kerr_over_2pi_hz": 4e3},
    "drives": {"R_ET": [{"rabi_over_chi": 0.1, "detuning_over_chi": -3.4}]}
  })");
  const auto& d = c.drives.at(GateKind::kEtPhase);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(d[0].omega, 0.5 * 0.1 * kTwoPi * 2e6, 1e-6);
  EXPECT_NEAR(d[0].delta_d, -3.4 * kTwoPi * 2e6, 1e-6);
  // Unlisted gates scale with chi.
  EXPECT_NEAR(c.drives.at(GateKind::kEtIdle)[1].delta_d, -2.27 * kTwoPi * 2e6, 1e-3);
}

TEST(Config, UnknownKeysReportFullPath) {
  EXPECT_NE(error_of(R"({"noise": {"channels": {"photon_gain": true}}})")
                .find("noise.channels.photon_gain: unknown key"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"repetitive": {"runs": [{"gate": "R_ET", "interval_s": 1e-4, "x": 1}]}})")
                .find("repetitive.runs[0].x"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"devcie": {}})").find("devcie: unknown key"), std::string::npos);
}

TEST(Config, TypeAndValueErrors) {
  EXPECT_NE(error_of(R"({"device": {"chi_over_2pi_hz": "big"}})")
                .find("device.chi_over_2pi_hz: expected a number"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"device": []})").find("device: expected an object"), std::string::npos);
  EXPECT_NE(error_of(R"({"et_verify": {"gates": ["R_Foo"]}})").find("et_verify.gates[0]"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"wigner_evolution": {"times_s": [3e-5, 1e-5]}})").find("ascending"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"repetitive": {"runs": [{"gate": "R_ET", "interval_s": 1e-6}]}})")
                .find("must exceed"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"pass_sweep": {"rabi_over_2pi_hz": {"start": 0, "stop": 1}}})")
                .find("pass_sweep.rabi_over_2pi_hz.count"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"version": 2})").find("version"), std::string::npos);
  EXPECT_NE(error_of("{\"device\": ").find("malformed JSON"), std::string::npos);
  EXPECT_NE(error_of(R"({"drives": {"switching": "abrupt"}})").find("drives.switching"),
            std::string::npos);
}

TEST(Config, PhysicsErrors) {
  EXPECT_THROW(parse_config(R"({"noise": {"qubit_t1_s": -1}})"), PhysicsError);
  EXPECT_THROW(parse_config(R"({"device": {"chi_over_2pi_hz": 0}})"), PhysicsError);
  EXPECT_THROW(
      parse_config(R"({"drives": {"R_ET": [{"rabi_over_chi": 0.074, "detuning_over_chi": -3.0}]}})"),
      PhysicsError);
}

TEST(Config, HashIgnoresFormatting) {
  const Config a = parse_config(R"({"noise": {"n_th": 0.02}, "device": {"cavity_dim": 9}})");
  const Config b = parse_config("{ \"device\":{\"cavity_dim\":9},\n\"noise\":{\"n_th\":0.02} }");
  const Config c = parse_config(R"({"noise": {"n_th": 0.03}, "device": {"cavity_dim": 9}})");
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
  EXPECT_EQ(a.hash, fnv1a64(a.canonical));
}

TEST(Config, RelativePulsePathResolvesAgainstFile) {
  const fs::path dir = fresh_dir("pulse");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "c.json");
    out << R"({"gate_fidelity": {"aqec_pulse_csv": "pulses/p.csv"}})";
  }
  const Config c = load_config(dir / "c.json");
  ASSERT_TRUE(c.gate_fidelity.pulse_csv.has_value());
  EXPECT_EQ(*c.gate_fidelity.pulse_csv, dir / "pulses/p.csv");
  EXPECT_THROW(load_config(dir / "missing.json"), IoError);
}

TEST(Commands, NamesAndUnknownCommand) {
  const auto names = commands::command_names();
  ASSERT_EQ(names.size(), 7u);
  EXPECT_EQ(names[0], "pass-sweep");
  const Config c = parse_config("{}");
  EXPECT_THROW(commands::run_command(c, "fly", {fresh_dir("unknown"), 1, 1}), InvalidArgument);
  EXPECT_THROW(commands::run_command(c, "pass-sweep", {fresh_dir("threads"), 1, 0}),
               InvalidArgument);
}

TEST(Commands, PassSweepWritesTableAndManifest) {
  const Config c = parse_config(R"({"pass_sweep": {"rabi_over_2pi_hz": [0, 1e5]}})");
  const fs::path dir = fresh_dir("pass");
  const auto m = commands::run_command(c, "pass-sweep", {dir, 7, 1});
  ASSERT_EQ(m.outputs.size(), 1u);
  EXPECT_EQ(m.outputs[0].file, "pass_sweep.csv");
  const std::string csv = slurp(dir / "pass_sweep.csv");
  EXPECT_EQ(csv.rfind("amplitude_over_2pi_hz,n,f_n_hz_exact,f_n_hz_perturbative\n", 0), 0u);
  EXPECT_NE(csv.find("0,3,-14400,-14400\n"), std::string::npos);
  const std::string manifest = slurp(dir / "manifest.json");
  EXPECT_NE(manifest.find("\"seed\": 7"), std::string::npos);
  EXPECT_NE(manifest.find("\"command\": \"pass-sweep\""), std::string::npos);
}

TEST(Commands, StochasticOutputIsReproducible) {
  const Config c = parse_config(R"({
    "excitation_sweep": {"rabi_over_2pi_hz": [1e5], "fock": [3], "duration_s": 2e-6,
                         "samples": 10,
                         "dephasing": {"trajectories": 40, "fock": [2]}}
  })");
  const fs::path a = fresh_dir("rep_a"), b = fresh_dir("rep_b"), d = fresh_dir("rep_d");
  commands::run_command(c, "excitation-sweep", {a, 11, 1});
  commands::run_command(c, "excitation-sweep", {b, 11, 2});
  commands::run_command(c, "excitation-sweep", {d, 12, 1});
  EXPECT_EQ(slurp(a / "dephasing.csv"), slurp(b / "dephasing.csv"));
  EXPECT_EQ(slurp(a / "excitation_sweep.csv"), slurp(b / "excitation_sweep.csv"));
  EXPECT_NE(slurp(a / "dephasing.csv"), slurp(d / "dephasing.csv"));
}

TEST(Commands, UnwritableDirectory) {
  const fs::path dir = fresh_dir("blocked");
  {
    std::ofstream f(dir);  // a file where the directory should go
  }
  EXPECT_THROW(commands::run_command(parse_config("{}"), "pass-sweep", {dir / "sub", 1, 1}),
               IoError);
  fs::remove(dir);
}

}  // namespace
}  // namespace etsim::config
