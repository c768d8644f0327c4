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

#include "linswap/run_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "linswap/convex_opt.hpp"

namespace linswap {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

LearnerKind parse_kind(const std::string& s) {
  if (s == "linear-swap") return LearnerKind::kLinearSwap;
  if (s == "trigger") return LearnerKind::kTrigger;
  if (s == "external") return LearnerKind::kExternal;
  throw ValidationError("unknown learner kind '" + s + "'");
}

const char* kind_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::kLinearSwap: return "linear-swap";
    case LearnerKind::kTrigger: return "trigger";
    case LearnerKind::kExternal: return "external";
  }
  return "?";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

std::string RunConfig::data_path() const {
  return trace_data.empty() ? trace_csv + ".data" : trace_data;
}

std::string RunConfig::manifest_path() const {
  return manifest.empty() ? trace_csv + ".manifest" : manifest;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool have_game = false;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(lineno, 1, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "game") {
      cfg.game = value;
      have_game = true;
    } else if (key == "kinds") {
      cfg.kinds.clear();
      std::istringstream ks(value);
      std::string part;
      while (std::getline(ks, part, ','))
        cfg.kinds.push_back(parse_kind(trim(part)));
    } else if (key == "schedule") {
      if (value == "invsqrt")
        cfg.schedule = EtaSchedule::kInvSqrt;
      else if (value == "constant")
        cfg.schedule = EtaSchedule::kConstant;
      else
        throw ParseError(lineno, 1, "schedule must be invsqrt or constant");
    } else if (key == "eta") {
      cfg.eta = std::stod(value);
    } else if (key == "T") {
      cfg.T = std::stoi(value);
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else if (key == "store_every") {
      cfg.store_every = std::stoi(value);
    } else if (key == "sample_plans") {
      cfg.sample_plans = value == "true" || value == "1";
    } else if (key == "trace") {
      cfg.trace_csv = value;
    } else if (key == "trace_data") {
      cfg.trace_data = value;
    } else if (key == "manifest") {
      cfg.manifest = value;
    } else {
      throw ParseError(lineno, 1, "unknown key '" + key + "'");
    }
  }
  if (!have_game) throw ValidationError("config is missing the game key");
  if (cfg.T < 1) throw ValidationError("config needs T >= 1");
  return cfg;
}

GameTree instantiate_game(const std::string& spec) {
  if (spec == "signaling") return build_signaling_game();
  if (spec == "counterexample") return build_counterexample_game();
  if (spec == "figure") return build_figure_game();
  if (spec.rfind("kuhn(", 0) == 0 && spec.back() == ')') {
    const std::string args = spec.substr(5, spec.size() - 6);
    const size_t comma = args.find(',');
    if (comma == std::string::npos)
      throw ValidationError("expected kuhn(RANKS,PLAYERS)");
    return build_kuhn_poker(std::stoi(args.substr(0, comma)),
                            std::stoi(args.substr(comma + 1)));
  }
  if (spec.rfind("file ", 0) == 0) return parse_game(read_file(trim(spec.substr(5))));
  if (spec.rfind("sat ", 0) == 0) {
    int vars = 0;
    const std::vector<Clause> cnf = parse_cnf(read_file(trim(spec.substr(4))), &vars);
    return build_sat_reduction(cnf, vars);
  }
  throw ValidationError("unknown game spec '" + spec + "'");
}

void write_trace_csv(const std::string& path, const PlayTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "t,player,avg_external_regret,avg_trigger_regret,"
         "avg_linear_swap_regret,payoff\n";
  const int n = static_cast<int>(trace.players.size());
  const int T = static_cast<int>(trace.players[0].xs.size());

  // Incremental accumulators per player: prefix loss sums for the
  // external audit, per-trigger erased mass and loss fields, and the
  // matrix-loss prefix for the linear-swap LP.
  struct Acc {
    Eigen::VectorXd cum;
    double paid = 0;
    std::vector<double> erased;
    std::vector<Eigen::VectorXd> fields;
    Eigen::MatrixXd G;
  };
  std::vector<Acc> accs(n);
  std::vector<LinMapSystem> systems;
  for (int p = 0; p < n; ++p) {
    const int nseq = trace.indices[p].num_seqs();
    accs[p].cum = Eigen::VectorXd::Zero(nseq);
    accs[p].erased.assign(nseq, 0.0);
    accs[p].fields.assign(nseq, Eigen::VectorXd::Zero(nseq));
    accs[p].G = Eigen::MatrixXd::Zero(nseq, nseq);
    systems.push_back(compile_self_map_system(trace.indices[p]));
  }

  for (int t = 0; t < T; ++t) {
    for (int p = 0; p < n; ++p) {
      const SequenceIndex& idx = trace.indices[p];
      Acc& acc = accs[p];
      const Eigen::VectorXd& loss = trace.players[p].losses[t];
      const Eigen::VectorXd& x = trace.players[p].xs[t];
      acc.cum += loss;
      acc.paid += trace.players[p].payoff[t];
      acc.G += loss * x.transpose();
      for (int trig = 0; trig < idx.num_seqs(); ++trig) {
        for (int s : idx.seqs_below(trig)) acc.erased[trig] += loss[s] * x[s];
        const double fired = x[trig];
        if (fired == 0) continue;
        if (trig == 0) {
          acc.fields[trig] += fired * loss;
        } else {
          for (int s : idx.subtree_seqs(idx.seq_infoset[trig]))
            acc.fields[trig][s] += fired * loss[s];
        }
      }

      const double steps = t + 1;
      const double ext = (acc.paid - min_linear_over_polytope(idx, acc.cum)) / steps;
      double trig_best = -kInf;
      for (int trig = 0; trig < idx.num_seqs(); ++trig) {
        double inner;
        if (trig == 0)
          inner = min_linear_over_polytope(idx, acc.fields[trig]);
        else
          inner = min_linear_over_subtree(idx, idx.seq_infoset[trig],
                                          acc.fields[trig]);
        trig_best = std::max(trig_best, acc.erased[trig] - inner);
      }
      double lin_best = 0;
      optimize_over_system(systems[p], acc.G, /*maximize=*/false, &lin_best);
      out << (t + 1) << "," << (p + 1) << "," << fmt(ext) << ","
          << fmt(trig_best / steps) << "," << fmt((acc.paid - lin_best) / steps)
          << "," << fmt(trace.players[p].payoff[t]) << "\n";
    }
  }
}

void write_trace_data(const std::string& path, const PlayTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "linswap-trace 1\n";
  out << "game_hash " << trace.game_hash << "\n";
  out << "players " << trace.players.size() << "\n";
  out << "T " << trace.players[0].xs.size() << "\n";
  out << "kinds";
  for (LearnerKind k : trace.kinds) out << " " << kind_name(k);
  out << "\n";
  if (trace.aborted) out << "aborted " << trace.abort_reason << "\n";
  const int n = static_cast<int>(trace.players.size());
  const int T = static_cast<int>(trace.players[0].xs.size());
  for (int t = 0; t < T; ++t)
    for (int p = 0; p < n; ++p) {
      const PlayerTrace& pt = trace.players[p];
      out << "x " << (t + 1) << " " << (p + 1);
      for (int s = 0; s < pt.xs[t].size(); ++s) out << " " << fmt(pt.xs[t][s]);
      out << "\nloss " << (t + 1) << " " << (p + 1);
      for (int s = 0; s < pt.losses[t].size(); ++s)
        out << " " << fmt(pt.losses[t][s]);
      out << "\nmpay " << (t + 1) << " " << (p + 1) << " "
          << fmt(pt.matrix_payoff[t]) << "\n";
    }
}

PlayTrace read_trace_data(const std::string& path, const GameTree& game) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace data: " + path);
  PlayTrace trace;
  std::string line;
  if (!std::getline(in, line) || trim(line) != "linswap-trace 1")
    throw ValidationError("not a trace data file: " + path);
  int n = 0, T = 0;
  while (std::getline(in, line)) {
    std::istringstream is(line);
    std::string key;
    is >> key;
    if (key == "game_hash") {
      uint64_t h;
      is >> h;
      if (h != game.hash())
        throw ValidationError("trace was produced from a different game "
                              "(hash mismatch)");
    } else if (key == "players") {
      is >> n;
      trace.players.resize(n);
      for (int p = 1; p <= n; ++p)
        trace.indices.push_back(derive_sequence_index(game, p));
      trace.game_hash = game.hash();
    } else if (key == "T") {
      is >> T;
      trace.T = T;
    } else if (key == "kinds") {
      std::string k;
      while (is >> k) trace.kinds.push_back(parse_kind(k));
    } else if (key == "aborted") {
      trace.aborted = true;
      std::getline(is, trace.abort_reason);
    } else if (key == "x" || key == "loss" || key == "mpay") {
      int t, p;
      is >> t >> p;
      if (p < 1 || p > n) throw ValidationError("bad player in trace data");
      PlayerTrace& pt = trace.players[p - 1];
      if (key == "mpay") {
        double v;
        is >> v;
        pt.matrix_payoff.push_back(v);
        continue;
      }
      Eigen::VectorXd v(trace.indices[p - 1].num_seqs());
      for (int s = 0; s < v.size(); ++s) is >> v[s];
      if (key == "x") {
        pt.xs.push_back(v);
      } else {
        pt.losses.push_back(v);
        pt.payoff.push_back(v.dot(pt.xs.back()));
        pt.cumulative_payoff += pt.payoff.back();
      }
    } else if (!key.empty()) {
      throw ValidationError("unknown trace record '" + key + "'");
    }
  }
  return trace;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "library = linswap " << library_version() << "\n";
  out << "game_hash = " << manifest.game_hash << "\n";
  out << "seed = " << manifest.seed << "\n";
  for (const auto& [phase, seconds] : manifest.phase_seconds)
    out << "seconds_" << phase << " = " << fmt(seconds) << "\n";
  out << "config_begin\n" << manifest.config_text;
  if (!manifest.config_text.empty() && manifest.config_text.back() != '\n')
    out << "\n";
  out << "config_end\n";
}

std::string library_version() { return "0.1.0"; }

}  // namespace linswap
