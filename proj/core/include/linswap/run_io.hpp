// Copyright 2026 The linswap Authors
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

#ifndef LINSWAP_RUN_IO_HPP_
#define LINSWAP_RUN_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "linswap/equilibrium.hpp"
#include "linswap/learners.hpp"

namespace linswap {

// Line-oriented `key = value` run configuration.
struct RunConfig {
  std::string game;             // kuhn(R,P) | signaling | counterexample |
                                // figure | file <path> | sat <path>
  std::vector<LearnerKind> kinds;
  EtaSchedule schedule = EtaSchedule::kConstant;
  double eta = 0.1;
  int T = 1000;
  uint64_t seed = 0;
  int store_every = 100;
  bool sample_plans = false;
  std::string trace_csv = "trace.csv";
  std::string trace_data;       // defaults to trace_csv + ".data"
  std::string manifest;         // defaults to trace_csv + ".manifest"

  std::string data_path() const;
  std::string manifest_path() const;
};

RunConfig parse_run_config(const std::string& text);
GameTree instantiate_game(const std::string& game_spec);

// Per-iteration metrics CSV with the pinned schema
//   t,player,avg_external_regret,avg_trigger_regret,avg_linear_swap_regret,payoff
// Every value is printed with round-trip precision so reruns are
// byte-identical.
void write_trace_csv(const std::string& path, const PlayTrace& trace);

// Full per-iteration strategies and losses; enough to recompute every
// audit. The header carries the game hash for consistency checks.
void write_trace_data(const std::string& path, const PlayTrace& trace);
PlayTrace read_trace_data(const std::string& path, const GameTree& game);

struct RunManifest {
  std::string config_text;
  uint64_t game_hash = 0;
  uint64_t seed = 0;
  std::string library_version;
  std::vector<std::pair<std::string, double>> phase_seconds;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

std::string library_version();

}  // namespace linswap

#endif  // LINSWAP_RUN_IO_HPP_
