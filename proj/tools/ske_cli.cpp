// Copyright 2026 The ske Authors
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

// ske: secret-key bounds, degradedness checks, protocol simulation and AEP
// verification for pairs of discrete memoryless broadcast channels.
//
// Exit codes: 0 success, 2 input error, 3 infeasible configuration.

#include <ske/experiment.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;

/// Validates a channel file (line-level diagnostics) and returns its raw JSON.
ske::json channel_file(const std::string& path)
{
  auto doc = ske::read_json_file(path);
  ske::channel_from_document(doc);
  return std::move(doc.value);
}

ske::json scheme_file(const std::string& path)
{
  if (path.empty()) return "default";
  auto doc = ske::read_json_file(path);
  ske::scheme_from_document(doc);
  return std::move(doc.value);
}

ske::json joint_file(const std::string& path)
{
  auto doc = ske::read_json_file(path);
  ske::joint_from_document(doc);
  return std::move(doc.value);
}

std::vector<std::size_t> parse_aux_card(const std::string& s)
{
  std::vector<std::size_t> out;
  for (const auto& f : ske::detail::split_fields(s, ',')) {
    std::size_t v = 0;
    const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || r.ec != std::errc() || r.ptr != f.data() + f.size()) {
      throw ske::InputError("--aux-card", 0, "expected v,w1,w2 (0 selects the default), got \"" + s + "\"");
    }
    out.push_back(v);
  }
  if (out.size() != 3) throw ske::InputError("--aux-card", 0, "expected three values v,w1,w2, got \"" + s + "\"");
  return out;
}

ske::json ratio_grid_json(const std::string& s)
{
  ske::json out = ske::json::array();
  for (const auto& r : ske::parse_ratio_grid(s)) out.push_back({r.nf, r.nb});
  return out;
}

/// Randomized commands need an explicit seed whenever a report file is written.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, const std::string& out)
{
  if (!seed && !out.empty()) throw ske::InputError("--seed", 0, "--seed is required when --out is set");
  return seed.value_or(1);
}

void emit(const ske::json& report, const std::string& out)
{
  const auto text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f || !(f << text)) throw ske::InputError(out, 0, "cannot write report");
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Secret-key agreement over two-way wiretap channels"};
  app.set_version_flag("--version", std::string(ske::kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  unsigned jobs = 0;
  app.add_option("--jobs", jobs, "Worker threads (default: SKE_JOBS, else hardware concurrency)")
      ->envname("SKE_JOBS")
      ->check(CLI::Range(1u, 1024u));

  std::string out;
  std::optional<std::uint64_t> seed;
  std::string command;
  ske::json config;
  std::function<void()> resolve;

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Lower and upper bounds on the secret-key capacity");
  std::string fwd, bwd, aux_card = "0,0,0", ratio_grid = "default";
  double grid = 0.01;
  int restarts = 20;
  bounds->add_option("--fwd", fwd, "Forward channel file (Alice to Bob and Eve)")->required();
  bounds->add_option("--bwd", bwd, "Backward channel file (Bob to Alice and Eve)")->required();
  bounds->add_option("--aux-card", aux_card, "Auxiliary cardinalities v,w1,w2; 0 selects the default")
      ->capture_default_str();
  bounds->add_option("--grid", grid, "Simplex grid step")->capture_default_str();
  bounds->add_option("--restarts", restarts, "Random restarts per search")->capture_default_str();
  bounds->add_option("--ratio-grid", ratio_grid, "\"default\" or n_f:n_b list such as 1:1,1:3")
      ->capture_default_str();
  bounds->add_option("--seed", seed, "Master seed");
  bounds->add_option("--out", out, "Report file (stdout when absent)");
  bounds->callback([&] {
    command = "bounds";
    resolve = [&] {
      config = {{"fwd", channel_file(fwd)},
                {"bwd", channel_file(bwd)},
                {"aux_card", parse_aux_card(aux_card)},
                {"grid", grid},
                {"restarts", restarts},
                {"ratio_grid", ratio_grid_json(ratio_grid)},
                {"seed", resolve_seed(seed, out)}};
    };
  });

  // check-degraded
  auto* degraded = app.add_subcommand("check-degraded", "Test a channel for a degraded decomposition");
  std::string ch, split;
  double tol = ske::kInfoTol;
  degraded->add_option("--ch", ch, "Channel file")->required();
  degraded->add_option("--split", split, "Factorization OxR,OxR,OxR of X, Y and Z (searched when |alphabet| <= 4)");
  degraded->add_option("--tol", tol, "Residual tolerance")->capture_default_str();
  degraded->add_option("--out", out, "Report file (stdout when absent)");
  degraded->callback([&] {
    command = "check-degraded";
    resolve = [&] {
      if (!split.empty()) ske::parse_split(split);
      config = {{"ch", channel_file(ch)}, {"split", split.empty() ? ske::json(nullptr) : ske::json(split)},
                {"tol", tol}};
    };
  });

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo run of the two-way key agreement protocol");
  std::size_t nf = 0, trials = 200, eta_f_cap = ske::ParameterCaps{}.eta_f, attack_cap = 12;
  double alpha = 0, beta = 0, epsilon = 0;
  bool fresh = true;
  std::string scheme;
  simulate->add_option("--fwd", fwd, "Forward channel file")->required();
  simulate->add_option("--bwd", bwd, "Backward channel file")->required();
  simulate->add_option("--nf", nf, "Forward block length")->required();
  simulate->add_option("--alpha", alpha, "Forward rate slack")->required();
  simulate->add_option("--beta", beta, "Backward rate slack")->required();
  simulate->add_option("--epsilon", epsilon, "Typicality parameter")->required();
  simulate->add_option("--scheme", scheme,
                       "Auxiliary scheme file (default: V = Y_f, W2 constant, W1 uniform, X_b = W1)");
  simulate->add_option("--trials", trials, "Protocol runs")->capture_default_str();
  simulate->add_option("--fresh-codebooks", fresh, "Draw new codebooks for every trial")->capture_default_str();
  simulate->add_option("--max-eta-f", eta_f_cap, "Cap on the pool exponent")->capture_default_str();
  simulate->add_option("--attack-log2-cap", attack_cap, "Skip the unaided eavesdropper decoder above 2^this pairs")
      ->capture_default_str();
  simulate->add_option("--seed", seed, "Master seed");
  simulate->add_option("--out", out, "Report file (stdout when absent)");
  simulate->callback([&] {
    command = "simulate";
    resolve = [&] {
      const ske::ParameterCaps caps;
      config = {{"fwd", channel_file(fwd)},
                {"bwd", channel_file(bwd)},
                {"scheme", scheme_file(scheme)},
                {"nf", nf},
                {"alpha", alpha},
                {"beta", beta},
                {"epsilon", epsilon},
                {"trials", trials},
                {"fresh_codebooks", fresh},
                {"caps",
                 {{"eta_f", eta_f_cap},
                  {"pool_cells", caps.pool_cells},
                  {"codebook_log2", caps.codebook_log2},
                  {"codebook_cells", caps.codebook_cells}}},
                {"attack_log2_cap", attack_cap},
                {"seed", resolve_seed(seed, out)}};
    };
  });

  // verify-aep
  auto* aep = app.add_subcommand("verify-aep", "Monte-Carlo check of the bipartite joint AEP");
  std::string joint_u, joint_t;
  std::size_t n = 0, d = 0, aep_trials = 10000;
  double aep_eps = 0.1;
  aep->add_option("--jointU", joint_u, "Joint law of the first sub-block")->required();
  aep->add_option("--jointT", joint_t, "Joint law of the second sub-block")->required();
  aep->add_option("--n", n, "First sub-block length")->required();
  aep->add_option("--d", d, "Second sub-block length")->required();
  aep->add_option("--epsilon", aep_eps, "Typicality parameter")->capture_default_str();
  aep->add_option("--trials", aep_trials, "Draws per estimate")->capture_default_str();
  aep->add_option("--seed", seed, "Master seed");
  aep->add_option("--out", out, "Report file (stdout when absent)");
  aep->callback([&] {
    command = "verify-aep";
    resolve = [&] {
      config = {{"jointU", joint_file(joint_u)}, {"jointT", joint_file(joint_t)}, {"n", n}, {"d", d},
                {"epsilon", aep_eps}, {"trials", aep_trials}, {"seed", resolve_seed(seed, out)}};
    };
  });

  // rerun
  auto* rerun = app.add_subcommand("rerun", "Re-run a report from its echoed command and config");
  std::string report_path;
  rerun->add_option("--report", report_path, "Report file")->required();
  rerun->add_option("--out", out, "Report file (stdout when absent)");
  rerun->callback([&] {
    resolve = [&] {
      const auto doc = ske::read_json_file(report_path);
      if (!doc.value.is_object() || !doc.value.contains("command") || !doc.value.contains("config") ||
          !doc.value.at("command").is_string()) {
        throw ske::InputError(report_path, 0, "not a report: needs \"command\" and \"config\"");
      }
      command = doc.value.at("command").get<std::string>();
      config = doc.value.at("config");
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  try {
    resolve();
    emit(ske::run_experiment(command, config, jobs), out);
  } catch (const ske::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ske::ProtocolInfeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
