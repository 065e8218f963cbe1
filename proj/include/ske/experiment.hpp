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

#pragma once

// Experiments driven by a resolved JSON config. A report carries that config
// verbatim (channels inlined), so `run_experiment(r["command"], r["config"])`
// reproduces every numeric field; only "timing" and "execution" may differ.

#include <chrono>
#include <string>

#include "bounds.hpp"
#include "io.hpp"
#include "protocol.hpp"
#include "security.hpp"
#include "typicality.hpp"

namespace ske {

inline constexpr const char* kToolVersion = "0.1.0";

/// Fewest trials `simulate` accepts.
inline constexpr std::size_t kCliMinTrials = 100;

/// V = Y_f, W2 constant, W1 uniform on the backward input alphabet, X_b = W1.
inline AuxScheme default_scheme(const TwoDmbc& two)
{
  const std::size_t ny = two.forward.y_size(), nx = two.backward.x_size();
  return AuxScheme{ny, nx, 1, Kernel::identity(ny), Distribution::uniform(1),
                   Kernel::constant(1, Distribution::uniform(nx)), Kernel::identity(nx)};
}

namespace detail {

inline Dmbc config_channel(const json& config, const char* key)
{
  if (!config.contains(key)) throw InputError("config", 0, std::string("missing \"") + key + "\"");
  return parse_channel(config.at(key).dump(), std::string("config.") + key).channel;
}

inline JointDistribution config_joint(const json& config, const char* key)
{
  if (!config.contains(key)) throw InputError("config", 0, std::string("missing \"") + key + "\"");
  return parse_joint(config.at(key).dump(), std::string("config.") + key);
}

inline json bounds_results(const json& c, unsigned jobs)
{
  const TwoDmbc two{config_channel(c, "fwd"), config_channel(c, "bwd")};
  LowerBoundOptions o;
  o.grid = c.at("grid").get<double>();
  o.restarts = c.at("restarts").get<int>();
  o.seed = c.at("seed").get<std::uint64_t>();
  o.jobs = static_cast<int>(jobs);
  const auto card = c.at("aux_card").get<std::vector<std::size_t>>();
  if (card.size() != 3) throw InputError("--aux-card", 0, "expected three cardinalities v,w1,w2");
  o.caps = {card[0], card[1], card[2]};
  o.ratios.clear();
  for (const auto& r : c.at("ratio_grid")) o.ratios.push_back({r.at(0).get<int>(), r.at(1).get<int>()});
  if (o.ratios.empty()) throw InputError("--ratio-grid", 0, "empty ratio grid");
  if (!(o.grid > 0.0 && o.grid <= 0.5)) throw InputError("--grid", 0, "grid must lie in (0, 0.5]");
  if (o.restarts < 0) throw InputError("--restarts", 0, "restarts must be >= 0");

  const auto lower = lower_bound(two, o);
  const auto upper = upper_bound(two, o.grid, o.restarts, o.seed);
  json out{{"lower_bound", lower.value}, {"upper_bound", upper.value}, {"lower_feasible", lower.feasible}};
  for (const auto& part : lower.parts) {
    if (!part.direction.empty()) out["L_" + part.direction] = part.feasible ? json(part.value) : json(nullptr);
  }
  out["lower_detail"] = to_json(lower);
  out["upper_detail"] = to_json(upper);
  return out;
}

inline json check_degraded_results(const json& c)
{
  const auto ch = config_channel(c, "ch");
  const double tol = c.at("tol").get<double>();
  if (!(tol > 0.0)) throw InputError("--tol", 0, "tol must be > 0");
  const auto input = Distribution::uniform(ch.x_size());
  if (!c.at("split").is_null()) {
    return to_json(analyze_degraded(ch, parse_split(c.at("split").get<std::string>()), input, tol));
  }
  if (ch.x_size() > kMaxSplitSearchAlphabet || ch.y_size() > kMaxSplitSearchAlphabet ||
      ch.z_size() > kMaxSplitSearchAlphabet) {
    throw InputError("--split", 0,
                     "split required: alphabets larger than " + std::to_string(kMaxSplitSearchAlphabet) +
                         " are not searched automatically");
  }
  if (const auto found = find_degraded_split(ch, input, tol)) {
    auto j = to_json(*found);
    j["split_searched"] = true;
    return j;
  }
  auto j = to_json(analyze_degraded(ch, ChannelSplit::obverse_only(ch), input, tol));
  j["split_searched"] = true;
  return j;
}

inline json radius(const ProportionEstimate& e) { return (e.hi - e.lo) / 2.0; }

inline json simulate_results(const json& c, unsigned jobs)
{
  const TwoDmbc two{config_channel(c, "fwd"), config_channel(c, "bwd")};
  const auto& sj = c.at("scheme");
  const auto scheme = sj == "default" ? default_scheme(two) : parse_scheme(sj.dump(), "config.scheme");
  try {
    scheme.validate(two);
  } catch (const std::invalid_argument& e) {
    throw InputError("scheme", 0, e.what());
  }
  const auto input_f = Distribution::uniform(two.forward.x_size());
  ParameterCaps caps;
  const auto& cj = c.at("caps");
  caps.eta_f = cj.at("eta_f").get<std::size_t>();
  caps.pool_cells = cj.at("pool_cells").get<std::size_t>();
  caps.codebook_log2 = cj.at("codebook_log2").get<std::size_t>();
  caps.codebook_cells = cj.at("codebook_cells").get<std::size_t>();

  SecurityOptions opt;
  opt.trials = c.at("trials").get<std::size_t>();
  opt.seed = c.at("seed").get<std::uint64_t>();
  opt.fresh_codebooks = c.at("fresh_codebooks").get<bool>();
  opt.min_trials = kCliMinTrials;
  opt.jobs = jobs;
  opt.attack_log2_cap = c.at("attack_log2_cap").get<std::size_t>();
  if (opt.trials < kCliMinTrials) {
    throw InputError("--trials", 0, "at least " + std::to_string(kCliMinTrials) + " trials required");
  }
  const auto nf = c.at("nf").get<std::size_t>();
  if (nf == 0) throw InputError("--nf", 0, "nf must be >= 1");
  const double alpha = c.at("alpha").get<double>(), beta = c.at("beta").get<double>(),
               eps = c.at("epsilon").get<double>();
  if (!(alpha > 0.0 && beta > 0.0 && eps > 0.0)) throw InputError("config", 0, "alpha, beta, epsilon must be > 0");

  const auto params = derive_parameters(two, scheme, input_f, nf, alpha, beta, eps, caps);
  const auto est = estimate_security(two, scheme, input_f, params, opt).first;
  json out{{"scheme", to_json(scheme)}, {"parameters", to_json(params)}, {"estimate", to_json(est)}};
  out["randomness"] = {{"key_entropy_rate", est.key_entropy_rate},
                       {"rate_ceiling", est.rate_ceiling},
                       {"key_uniformity_p", est.key_uniformity.p_value}};
  out["reliability"] = {{"error_rate", est.error.rate}, {"radius_95", radius(est.error)}};
  out["secrecy"] = {{"leakage_ratio", est.leakage_ratio ? json(*est.leakage_ratio) : json(nullptr)},
                    {"genie_reconstruct_rate", est.eve_reconstruct.rate},
                    {"radius_95", radius(est.eve_reconstruct)}};
  return out;
}

inline json verify_aep_results(const json& c, unsigned jobs)
{
  const auto u = config_joint(c, "jointU");
  const auto t = config_joint(c, "jointT");
  TypicalityParams p;
  p.n = c.at("n").get<std::size_t>();
  p.d = c.at("d").get<std::size_t>();
  p.epsilon = c.at("epsilon").get<double>();
  const auto trials = c.at("trials").get<std::size_t>();
  if (trials == 0) throw InputError("--trials", 0, "trials must be >= 1");
  if (!(p.epsilon > 0.0)) throw InputError("--epsilon", 0, "epsilon must be > 0");
  if (p.N() == 0) throw InputError("--n", 0, "n + d must be >= 1");
  return to_json(verify_joint_aep(u, t, p, trials, c.at("seed").get<std::uint64_t>(), jobs));
}

}  // namespace detail

/// Runs `command` on a resolved config. Throws InputError for bad input and
/// ProtocolInfeasible when no coding parameters exist.
inline json run_experiment(const std::string& command, const json& config, unsigned jobs = 1)
{
  const auto t0 = std::chrono::steady_clock::now();
  json results;
  try {
    if (command == "bounds") {
      results = detail::bounds_results(config, jobs);
    } else if (command == "check-degraded") {
      results = detail::check_degraded_results(config);
    } else if (command == "simulate") {
      results = detail::simulate_results(config, jobs);
    } else if (command == "verify-aep") {
      results = detail::verify_aep_results(config, jobs);
    } else {
      throw InputError("command", 0, "unknown command \"" + command + "\"");
    }
  } catch (const json::exception& e) {
    throw InputError("config", 0, e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json report{{"tool", {{"name", "ske"}, {"version", kToolVersion}}}, {"command", command}, {"config", config}};
  if (config.contains("seed")) report["seeds"] = {{"master", config.at("seed")}};
  report["results"] = std::move(results);
  report["execution"] = {{"jobs", jobs}};
  report["timing"] = {{"wall_seconds", wall}};
  return report;
}

/// Re-runs a report from its echoed command and config.
inline json rerun_report(const json& report, unsigned jobs = 1)
{
  if (!report.contains("command") || !report.contains("config")) {
    throw InputError("report", 0, "report lacks \"command\" or \"config\"");
  }
  return run_experiment(report.at("command").get<std::string>(), report.at("config"), jobs);
}

/// The report without its run-dependent fields.
inline json reproducible_part(json report)
{
  report.erase("timing");
  report.erase("execution");
  return report;
}

}  // namespace ske
