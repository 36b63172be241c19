// Copyright 2026 The activetest Authors
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

// activetest: run estimators under the Monte Carlo harness, generate star
// instances, run the acceptance suite.
//
// Exit codes: 0 ok, 1 runtime failure, 2 bad flags or config, 3 acceptance
// failure (run-suite only).

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "activetest/acceptance.hpp"
#include "activetest/harness.hpp"
#include "activetest/instances.hpp"

namespace at = activetest;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAcceptance = 3;

struct CommonFlags {
  std::optional<double> eps;
  std::optional<double> d, k, p;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out;
  std::vector<std::string> constants;
  std::string instance;
  std::string config;
  bool no_timing = false;
};

void add_common(CLI::App* sub, CommonFlags& f, bool with_dkp = true) {
  sub->add_option("--eps", f.eps, "accuracy parameter");
  if (with_dkp) {
    sub->add_option("--d", f.d, "interval budget (intervals-da)");
    sub->add_option("--k", f.k, "neighbour count");
    sub->add_option("--p", f.p, "loss power");
  }
  sub->add_option("--trials", f.trials, "Monte Carlo trials");
  sub->add_option("--seed", f.seed, "64-bit master seed");
  sub->add_option("--threads", f.threads, "worker threads");
  sub->add_option("--out", f.out, "report path (.csv or .json)");
  sub->add_option("--constants", f.constants, "key=value overrides, repeatable")
      ->delimiter(',');
  sub->add_option("--instance", f.instance, "instance JSON");
  sub->add_option("--config", f.config, "TrialConfig JSON; flags override it");
  sub->add_flag("--no-timing", f.no_timing, "write 0 in the millis column");
}

std::map<std::string, double> parse_constants(const std::vector<std::string>& kv) {
  std::map<std::string, double> out;
  for (const auto& item : kv) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      at::fail(at::ErrorCode::kInvalidParameter, "constant '" + item + "' is not key=value");
    }
    try {
      std::size_t used = 0;
      const std::string value = item.substr(eq + 1);
      out[item.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      at::fail(at::ErrorCode::kInvalidParameter, "constant '" + item + "' has a non-numeric value");
    }
  }
  return out;
}

at::TrialConfig build_config(const std::string& algorithm, const CommonFlags& f) {
  at::TrialConfig c;
  if (!f.config.empty()) c = at::trial_config_from_json(at::read_json_file(f.config));
  c.algorithm = algorithm;
  if (f.eps) c.eps = *f.eps;
  if (f.trials) c.trials = *f.trials;
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (f.d) c.params["d"] = *f.d;
  if (f.k) c.params["k"] = *f.k;
  if (f.p) c.params["p"] = *f.p;
  for (const auto& [key, v] : parse_constants(f.constants)) {
    if (key == "tolerance") {
      c.tolerance = v;
    } else if (key == "success_target") {
      c.success_target = v;
    } else {
      c.params[key] = v;
    }
  }
  if (!f.instance.empty()) c.instance_path = f.instance;
  if (f.no_timing) c.record_timing = false;
  if (c.trials == 0) at::fail(at::ErrorCode::kInvalidParameter, "--trials must be >= 1");
  return c;
}

void print_aggregate(const at::TrialReport& r, const at::TrialConfig& c) {
  const at::Aggregate& a = r.aggregate;
  std::printf("%s eps=%g trials=%zu successes=%zu rate=%.3f ci=[%.3f, %.3f] required=%zu %s\n",
              r.algorithm.c_str(), c.eps, a.trials, a.successes, a.success_rate, a.ci_low,
              a.ci_high, a.required, a.passed ? "PASS" : "FAIL");
}

int run_harness(const std::string& algorithm, const CommonFlags& f) {
  const at::TrialConfig c = build_config(algorithm, f);
  const at::TrialReport r = at::run_trials(c);
  if (!f.out.empty()) at::write_report(f.out, r);
  print_aggregate(r, c);
  return kExitOk;
}

// One best-k search with its grid table; with --trials also the harness.
int run_best_k(const CommonFlags& f) {
  at::TrialConfig c = build_config("best-k", f);
  const std::size_t p = static_cast<std::size_t>(c.param("p", 1));
  at::Rng gen(at::derive_seed(c.seed, 0));
  at::KnnInstance inst =
      c.instance_path ? at::knn_from_json(at::read_json_file(*c.instance_path))
                      : at::make_line_knn(800, 200, 8, 0.1, gen);
  inst.precompute_rankings();
  const auto test = at::IndexDistribution::uniform(inst.ground_size());
  const auto exact = at::exact_soft_loss_table(inst, test, p);
  at::PointOracle oracle = inst.make_oracle();
  at::Rng rng(at::derive_seed(c.seed, 1));
  const at::BestKResult r = at::best_k(inst, oracle, test, p, c.eps, rng);
  std::printf("k* = %zu  (grid t=%zu, ratio=%.6f, %zu candidates, %zu repetitions, %llu queries)\n",
              r.k_star, r.grid.t, r.grid.ratio, r.grid.ks.size(), r.repetitions,
              static_cast<unsigned long long>(r.queries_used));
  std::printf("%6s %12s %12s\n", "k", "estimate", "exact");
  for (const auto& [k, est] : r.table) std::printf("%6zu %12.6f %12.6f\n", k, est, exact[k - 1]);
  if (f.trials) {
    const at::TrialReport rep = at::run_trials(c);
    if (!f.out.empty()) at::write_report(f.out, rep);
    print_aggregate(rep, c);
  }
  return kExitOk;
}

void write_instance(const std::string& out, const at::StarInstance& s) {
  if (out.empty()) {
    std::cout << at::knn_to_json(s.instance).dump() << '\n';
    std::cerr << at::star_meta_to_json(s.meta).dump() << '\n';
    return;
  }
  at::write_json_file(out, at::knn_to_json(s.instance));
  at::write_json_file(out + ".meta.json", at::star_meta_to_json(s.meta));
  std::printf("wrote %s (%zu points, pool %zu) and %s.meta.json\n", out.c_str(),
              s.instance.ground_size(), s.instance.pool_size(), out.c_str());
}

int gen_star_soft(const CommonFlags& f) {
  const auto kv = parse_constants(f.constants);
  auto get = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  const at::StarConstants constants{get("c1", 1.0), get("c2", 1.0), get("c3", 1.0)};
  at::StarOptions options;
  options.enforce_proof_regime = get("enforce", 0.0) != 0.0;
  const auto s = at::build_star_instance_soft(static_cast<std::size_t>(f.p.value_or(1)),
                                              f.eps.value_or(0.5), get("coin_mean", 0.5),
                                              constants, f.seed.value_or(1), options);
  write_instance(f.out, s);
  return kExitOk;
}

int gen_star_hard(const CommonFlags& f) {
  const auto kv = parse_constants(f.constants);
  auto get = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  const auto n = static_cast<std::size_t>(get("n", 8));
  const auto good = static_cast<std::size_t>(get("good", 3));
  const double gamma = get("gamma", 0.4);
  std::vector<double> means(n, 0.5 - gamma);
  for (std::size_t i = 0; i < good && i < n; ++i) means[i] = 0.5 + gamma;
  at::ArmSet arms(means, gamma);
  at::StarOptions options;
  options.enforce_proof_regime = get("enforce", 0.0) != 0.0;
  const auto s = at::build_star_instance_hard(arms, static_cast<std::size_t>(f.k.value_or(5)),
                                              f.eps.value_or(0.2),
                                              {get("c1", 2.0), get("c2", 0.05), 1.0},
                                              f.seed.value_or(1), options);
  write_instance(f.out, s);
  return kExitOk;
}

int gen_line(const CommonFlags& f) {
  const auto kv = parse_constants(f.constants);
  auto get = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  at::Rng rng(f.seed.value_or(1));
  const auto inst = at::make_line_knn(static_cast<std::size_t>(get("ground", 800)),
                                      static_cast<std::size_t>(get("pool", 200)),
                                      static_cast<std::size_t>(get("segments", 8)),
                                      get("noise", 0.1), rng);
  if (f.out.empty()) {
    std::cout << at::knn_to_json(inst).dump() << '\n';
  } else {
    at::write_json_file(f.out, at::knn_to_json(inst));
  }
  return kExitOk;
}

int run_suite(std::uint64_t seed, std::size_t trials, std::size_t threads,
              const std::vector<int>& only) {
  at::AcceptanceOptions o;
  o.seed = seed;
  o.trials = trials;
  o.threads = threads;
  bool all = true;
  auto report = [&](const at::CriterionResult& r) {
    all = all && r.passed;
    std::printf("%s\n", at::format_result(r).c_str());
    std::fflush(stdout);
  };
  if (only.empty()) {
    at::run_acceptance(o, report);
  } else {
    for (int id : only) report(at::run_criterion(id, o));
  }
  return all ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"activetest: active testing and distance approximation"};
  app.require_subcommand(1);

  std::map<std::string, CommonFlags> flags;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> algos = {
      {"intervals-da", "distance to unions of d intervals"},
      {"compose-da", "composition of interval blocks"},
      {"union-da", "disjoint union with unknown block masses"},
      {"knn-soft", "soft k-NN p-th power loss"},
      {"knn-hard", "hard k-NN error"},
      {"aga", "approximate good-arm fraction"},
      {"star-aga", "good-arm fraction through the star reduction"},
  };
  for (const auto& [name, help] : algos) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name], flags[name]);
  }
  subs["best-k"] = app.add_subcommand("best-k", "approximately best k; prints k* and the grid");
  add_common(subs["best-k"], flags["best-k"]);
  subs["gen-star-soft"] = app.add_subcommand("gen-star-soft", "single-star soft instance");
  add_common(subs["gen-star-soft"], flags["gen-star-soft"]);
  subs["gen-star-hard"] = app.add_subcommand("gen-star-hard", "n-star hard instance");
  add_common(subs["gen-star-hard"], flags["gen-star-hard"]);
  subs["gen-line"] = app.add_subcommand("gen-line", "random 1-d k-NN instance");
  add_common(subs["gen-line"], flags["gen-line"], false);

  auto* suite = app.add_subcommand("run-suite", "acceptance suite; exit 3 on any failure");
  std::uint64_t suite_seed = 20260101;
  std::size_t suite_trials = 100;
  std::size_t suite_threads = 1;
  std::vector<int> only;
  suite->add_option("--seed", suite_seed, "master seed");
  suite->add_option("--trials", suite_trials, "Monte Carlo trials per criterion");
  suite->add_option("--threads", suite_threads, "worker threads");
  suite->add_option("--only", only, "criterion ids")->delimiter(',')->check(CLI::Range(1, 13));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (suite->parsed()) return run_suite(suite_seed, suite_trials, suite_threads, only);
    if (subs["best-k"]->parsed()) return run_best_k(flags["best-k"]);
    if (subs["gen-star-soft"]->parsed()) return gen_star_soft(flags["gen-star-soft"]);
    if (subs["gen-star-hard"]->parsed()) return gen_star_hard(flags["gen-star-hard"]);
    if (subs["gen-line"]->parsed()) return gen_line(flags["gen-line"]);
    for (const auto& [name, _] : algos) {
      if (subs[name]->parsed()) return run_harness(name, flags[name]);
    }
  } catch (const at::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.code()) {
      case at::ErrorCode::kInvalidParameter:
      case at::ErrorCode::kInvalidClassParameter:
      case at::ErrorCode::kRegimeViolation:
      case at::ErrorCode::kInvalidK:
      case at::ErrorCode::kUnknownAlgorithm:
      case at::ErrorCode::kTruthUnavailable:
      case at::ErrorCode::kFormat:
        return kExitConfig;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
