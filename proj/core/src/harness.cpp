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

#include "activetest/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "activetest/bandit.hpp"
#include "activetest/composition.hpp"
#include "activetest/intervals.hpp"
#include "activetest/knn.hpp"

namespace activetest {

namespace {

constexpr std::uint64_t kInstanceStream = 0x1a57a7ceULL;

std::size_t as_size(double v, const char* key) {
  if (!(v >= 0.0) || v != std::floor(v)) {
    fail(ErrorCode::kInvalidParameter, std::string(key) + " must be a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

double TrialConfig::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

TrialConfig trial_config_from_json(const Json& j) {
  TrialConfig c;
  try {
    c.algorithm = j.at("algorithm").get<std::string>();
    c.eps = j.value("eps", c.eps);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    if (j.contains("params")) c.params = j.at("params").get<std::map<std::string, double>>();
    if (j.contains("instance")) c.instance_path = j.at("instance").get<std::string>();
    c.success_target = j.value("success_target", c.success_target);
    if (j.contains("tolerance")) c.tolerance = j.at("tolerance").get<double>();
    c.record_timing = j.value("record_timing", c.record_timing);
    c.threads = j.value("threads", c.threads);
  } catch (const Json::exception& e) {
    fail(ErrorCode::kFormat, std::string("trial config: ") + e.what());
  }
  if (c.trials == 0) fail(ErrorCode::kInvalidParameter, "trials must be >= 1");
  return c;
}

Json trial_config_to_json(const TrialConfig& c) {
  Json j{{"algorithm", c.algorithm}, {"eps", c.eps},         {"trials", c.trials},
         {"seed", c.seed},           {"params", c.params},   {"success_target", c.success_target},
         {"record_timing", c.record_timing}, {"threads", c.threads}};
  if (c.instance_path) j["instance"] = *c.instance_path;
  if (c.tolerance) j["tolerance"] = *c.tolerance;
  return j;
}

std::size_t required_successes(std::size_t trials, double p0) {
  if (trials == 0) return 0;
  const double n = static_cast<double>(trials);
  const double slack = 1.96 * std::sqrt(p0 * (1.0 - p0) / n);
  const double r = std::floor(n * (p0 - slack) + 1e-9);
  return r <= 0.0 ? 0 : static_cast<std::size_t>(r);
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.96;
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (ph + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

Aggregate aggregate_rows(const std::vector<TrialRow>& rows, double p0) {
  Aggregate a;
  a.trials = rows.size();
  for (const auto& r : rows) a.successes += r.success ? 1 : 0;
  a.success_rate = a.trials ? static_cast<double>(a.successes) / static_cast<double>(a.trials) : 0.0;
  std::tie(a.ci_low, a.ci_high) = wilson_interval(a.successes, a.trials);
  a.required = required_successes(a.trials, p0);
  a.passed = a.successes >= a.required;
  return a;
}

// ---------------------------------------------------------------------------
// Algorithm set-ups: build the instance and its truth once, then hand out a
// per-trial runner.

namespace {

struct Outcome {
  double output = 0.0;
  double truth = 0.0;
  std::uint64_t queries = 0;
  std::uint64_t unlabeled = 0;
  /// Signed error used for success; defaults to |output - truth|.
  std::optional<double> error;
};

struct Prepared {
  std::function<Outcome(Rng&)> run;
  double tolerance = 0.0;
};

using Setup = std::function<Prepared(const TrialConfig&, Rng&)>;

// Finite-support sample file: the distribution and the target are read off it.
struct FiniteSupport {
  Distribution dist;
  std::shared_ptr<std::map<double, Label>> labels;
  WeightedSample sample;
};

FiniteSupport load_support(const std::string& path) {
  FiniteSupport fs;
  fs.sample = sample_from_json(read_json_file(path));
  if (!fs.sample.fully_labeled() || fs.sample.empty()) {
    fail(ErrorCode::kTruthUnavailable, "sample file needs labels on every point");
  }
  fs.labels = std::make_shared<std::map<double, Label>>();
  std::vector<double> atoms, weights;
  for (const auto& e : fs.sample.entries()) {
    auto [it, fresh] = fs.labels->emplace(e.point, *e.label);
    if (!fresh && it->second != *e.label) {
      fail(ErrorCode::kFormat, "point listed twice with different labels");
    }
    atoms.push_back(e.point);
    weights.push_back(e.weight);
  }
  fs.dist = Distribution::finite(std::move(atoms), std::move(weights));
  return fs;
}

Prepared setup_intervals(const TrialConfig& c, Rng& irng) {
  const std::size_t d = as_size(c.param("d", 100), "d");
  IntervalDaConfig cfg;
  cfg.label_constant = c.param("label_constant", cfg.label_constant);
  cfg.unlabeled_constant = c.param("unlabeled_constant", cfg.unlabeled_constant);

  Distribution dist = Distribution::uniform01();
  TargetFunction<double> target;
  double truth = 0.0;
  if (c.instance_path) {
    FiniteSupport fs = load_support(*c.instance_path);
    WeightedSample normalized = fs.sample;
    truth = exact_distance_to_intervals(normalized, static_cast<long long>(d)).alpha /
            normalized.total_weight();
    dist = fs.dist;
    target = [labels = fs.labels](double x) { return labels->at(x); };
  } else {
    const std::size_t cells = as_size(c.param("cells", 100000), "cells");
    const std::size_t d_star = as_size(c.param("d_star", static_cast<double>(d)), "d_star");
    const CellTarget t = make_cell_target(cells, {{d_star, c.param("noise", 0.15)}}, irng);
    truth = exact_distance_to_intervals(t.grid(), static_cast<long long>(d)).alpha;
    target = t.function();
  }
  Prepared p;
  p.tolerance = c.tolerance.value_or(c.eps);
  p.run = [=](Rng& rng) {
    const DaResult r = interval_da(dist, target, c.eps, d, rng, cfg);
    return Outcome{r.alpha_hat, truth, r.queries_used, r.unlabeled_used, std::nullopt};
  };
  return p;
}

Prepared setup_compose(const TrialConfig& c, Rng& irng) {
  const std::size_t m = as_size(c.param("m", 40), "m");
  const double lambda = c.param("lambda", 2.0);
  const double mu = c.param("mu", 0.5);
  const std::size_t per_block = as_size(c.param("per_block", 2), "per_block");
  const double noise = c.param("noise", 0.1);
  const std::size_t noisy_every = as_size(c.param("noisy_every", 2), "noisy_every");
  const std::size_t width = as_size(c.param("cells_per_block", 250), "cells_per_block");
  if (m == 0 || noisy_every == 0) fail(ErrorCode::kInvalidParameter, "m and noisy_every >= 1");

  std::vector<BlockPlan> plans(m);
  for (std::size_t b = 0; b < m; ++b) {
    plans[b] = {per_block, b % noisy_every == 0 ? noise : 0.0};
  }
  const CellTarget t = make_cell_target(m * width, plans, irng);
  const CompositionSpec spec = interval_block_spec(m);
  const double budget = lambda * static_cast<double>(m);
  const double truth =
      distance_to_truncated_composition(t.grid(), spec,
                                        {budget, static_cast<std::size_t>(std::floor(budget + 1e-9))})
          .distance;

  CompositionDaConfig cfg;
  cfg.label_constant = c.param("label_constant", cfg.label_constant);
  cfg.block_constant = c.param("block_constant", cfg.block_constant);
  const CompositionDaPlan plan = plan_composition_da(m, lambda, c.eps, mu, cfg);
  const TargetFunction<double> target = t.function();

  Prepared p;
  p.tolerance = c.tolerance.value_or(c.eps);
  p.run = [=](Rng& rng) {
    LinePool pool(Distribution::uniform01().sample_n(plan.pool_required, rng), LineOracle(target));
    const CompositionDaResult r = composition_da(pool, spec, lambda, c.eps, mu, rng, cfg);
    return Outcome{r.estimate, truth, r.queries_used, r.unlabeled_used, std::nullopt};
  };
  return p;
}

Prepared setup_union(const TrialConfig& c, Rng& irng) {
  const std::size_t cells = as_size(c.param("cells", 100000), "cells");
  const std::size_t d_block = as_size(c.param("d_block", 1), "d_block");
  const CellTarget t = make_cell_target(
      cells, {{d_block, 0.0}, {0, c.param("noise", 0.4)}}, irng);

  // Truth: mass-weighted per-block distances on the exact grid.
  auto block_of = [](double x) { return interval_block_of(x, 2); };
  CompositionSpec split;
  split.blocks = 2;
  split.block_of = block_of;
  const auto parts = partition_by_block(t.grid(), split);
  double truth = 0.0;
  for (const auto& part : parts) {
    truth += exact_distance_to_intervals(part, static_cast<long long>(d_block)).alpha;
  }

  UnionDaConfig cfg;
  cfg.points_per_run = as_size(c.param("points_per_run", 200), "points_per_run");
  const std::size_t pool_size = union_pool_requirement(2, 0.5, c.eps, cfg);
  const TargetFunction<double> target = t.function();
  const BlockDa erm = [d_block](std::size_t, LineSlice& slice, double, Rng&) {
    WeightedSample s;
    const double w = 1.0 / static_cast<double>(slice.size());
    for (std::size_t i = 0; i < slice.size(); ++i) s.add(slice.point(i), w, slice.query(i));
    return exact_distance_to_intervals(s, static_cast<long long>(d_block)).alpha;
  };

  Prepared p;
  p.tolerance = c.tolerance.value_or(c.eps);
  p.run = [=](Rng& rng) {
    LinePool pool(Distribution::uniform01().sample_n(pool_size, rng), LineOracle(target));
    const UnionDaResult r = disjoint_union_da(pool, 2, block_of, erm, c.eps, rng, cfg);
    return Outcome{r.estimate, truth, r.queries_used, r.unlabeled_used, std::nullopt};
  };
  return p;
}

std::shared_ptr<const KnnInstance> knn_instance(const TrialConfig& c, Rng& irng,
                                                double default_pool) {
  std::shared_ptr<KnnInstance> inst;
  if (c.instance_path) {
    inst = std::make_shared<KnnInstance>(knn_from_json(read_json_file(*c.instance_path)));
  } else {
    const std::size_t pool = as_size(c.param("pool", default_pool), "pool");
    const std::size_t ground =
        as_size(c.param("ground", 4.0 * static_cast<double>(pool)), "ground");
    inst = std::make_shared<KnnInstance>(
        make_line_knn(ground, pool, as_size(c.param("segments", 8), "segments"),
                      c.param("noise", 0.1), irng));
  }
  inst->precompute_rankings();
  return inst;
}

Prepared setup_knn_soft(const TrialConfig& c, Rng& irng) {
  auto inst = knn_instance(c, irng, 500);
  const std::size_t k = as_size(c.param("k", 25), "k");
  const std::size_t p = as_size(c.param("p", 2), "p");
  const IndexDistribution test = IndexDistribution::uniform(inst->ground_size());
  const double truth = exact_soft_loss(*inst, test, k, p);
  Prepared out;
  out.tolerance = c.tolerance.value_or(c.eps);
  out.run = [=](Rng& rng) {
    PointOracle oracle = inst->make_oracle();
    const LossEstimate e = estimate_soft_loss_pth(*inst, oracle, test, k, p, c.eps, rng);
    return Outcome{e.value, truth, e.queries_used, e.iterations, std::nullopt};
  };
  return out;
}

Prepared setup_knn_hard(const TrialConfig& c, Rng& irng) {
  auto inst = knn_instance(c, irng, 500);
  const std::size_t k = as_size(c.param("k", 25), "k");
  const IndexDistribution test = IndexDistribution::uniform(inst->ground_size());
  const double truth = exact_hard_error(*inst, test, k);
  Prepared out;
  out.tolerance = c.tolerance.value_or(c.eps);
  out.run = [=](Rng& rng) {
    PointOracle oracle = inst->make_oracle();
    const LossEstimate e = estimate_hard_error(*inst, oracle, test, k, c.eps, rng);
    return Outcome{e.value, truth, e.queries_used, e.iterations, std::nullopt};
  };
  return out;
}

Prepared setup_best_k(const TrialConfig& c, Rng& irng) {
  auto inst = knn_instance(c, irng, 200);
  const std::size_t p = as_size(c.param("p", 1), "p");
  const IndexDistribution test = IndexDistribution::uniform(inst->ground_size());
  const auto table = std::make_shared<const std::vector<double>>(exact_soft_loss_table(*inst, test, p));
  const double best = *std::min_element(table->begin(), table->end());
  Prepared out;
  out.tolerance = c.tolerance.value_or(c.eps);
  out.run = [=](Rng& rng) {
    PointOracle oracle = inst->make_oracle();
    const BestKResult r = best_k(*inst, oracle, test, p, c.eps, rng);
    const double got = (*table)[r.k_star - 1];
    // One-sided: only excess loss counts against the search.
    return Outcome{got, best, r.queries_used, 0, got - best};
  };
  return out;
}

ArmSet gapped_arms(std::size_t n, std::size_t good, double gamma) {
  std::vector<double> means(n, 0.5 - gamma);
  for (std::size_t i = 0; i < good && i < n; ++i) means[i] = 0.5 + gamma;
  return ArmSet(std::move(means), gamma);
}

Prepared setup_aga(const TrialConfig& c, Rng&) {
  const std::size_t n = as_size(c.param("n", 200), "n");
  const double gamma = c.param("gamma", 0.1);
  const auto good = static_cast<std::size_t>(std::llround(c.param("good_fraction", 0.5) * static_cast<double>(n)));
  const double truth = static_cast<double>(good) / static_cast<double>(n);
  Prepared out;
  out.tolerance = c.tolerance.value_or(c.eps);
  out.run = [=](Rng& rng) {
    ArmSet arms = gapped_arms(n, good, gamma);
    const AgaResult r = natural_aga(arms, gamma, c.eps, rng);
    return Outcome{r.estimate, truth, r.pulls_used, r.arms_sampled, std::nullopt};
  };
  return out;
}

Prepared setup_star_aga(const TrialConfig& c, Rng&) {
  const std::size_t n = as_size(c.param("n", 8), "n");
  const std::size_t good = as_size(c.param("good", 3), "good");
  const double gamma = c.param("gamma", 0.4);
  const std::size_t k = as_size(c.param("k", 5), "k");
  const StarConstants constants{c.param("c1", 2.0), c.param("c2", 0.05), 1.0};
  StarOptions options;
  options.enforce_proof_regime = c.param("enforce", 0.0) != 0.0;
  const double truth = static_cast<double>(std::min(good, n)) / static_cast<double>(n);
  Prepared out;
  out.tolerance = c.tolerance.value_or(2.0 * c.eps);
  out.run = [=](Rng& rng) {
    ArmSet arms = gapped_arms(n, good, gamma);
    const StarInstance star = build_star_instance_hard(arms, k, c.eps, constants, rng(), options);
    const KnnInstance& inst = star.instance;
    PointOracle oracle = inst.make_oracle();
    const LossEstimate e = estimate_hard_error(
        inst, oracle, IndexDistribution::uniform(inst.ground_size()), k, c.eps, rng);
    return Outcome{e.value, truth, e.queries_used, inst.pool_size() + e.iterations,
                   std::nullopt};
  };
  return out;
}

const std::map<std::string, Setup>& registry() {
  static const std::map<std::string, Setup> r{
      {"intervals-da", setup_intervals}, {"compose-da", setup_compose},
      {"union-da", setup_union},         {"knn-soft", setup_knn_soft},
      {"knn-hard", setup_knn_hard},      {"best-k", setup_best_k},
      {"aga", setup_aga},                {"star-aga", setup_star_aga},
  };
  return r;
}

}  // namespace

std::vector<std::string> known_algorithms() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

TrialReport run_trials(const TrialConfig& config) {
  if (config.trials == 0) fail(ErrorCode::kInvalidParameter, "trials must be >= 1");
  const auto& reg = registry();
  auto it = reg.find(config.algorithm);
  if (it == reg.end()) fail(ErrorCode::kUnknownAlgorithm, "'" + config.algorithm + "'");

  Rng irng(derive_seed(config.seed, kInstanceStream));
  const Prepared prepared = it->second(config, irng);

  TrialReport report;
  report.algorithm = config.algorithm;
  report.rows.resize(config.trials);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.trials) return;
      try {
        Rng rng(derive_seed(config.seed, i + 1));
        const auto start = std::chrono::steady_clock::now();
        const Outcome o = prepared.run(rng);
        const auto stop = std::chrono::steady_clock::now();
        TrialRow& row = report.rows[i];
        row.trial = i;
        row.output = o.output;
        row.truth = o.truth;
        row.abs_error = o.error ? *o.error : std::abs(o.output - o.truth);
        row.success = row.abs_error <= prepared.tolerance + 1e-12;
        row.queries = o.queries;
        row.unlabeled = o.unlabeled;
        if (config.record_timing) {
          row.millis = std::chrono::duration<double, std::milli>(stop - start).count();
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(config.trials);
        return;
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, config.trials);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  report.aggregate = aggregate_rows(report.rows, config.success_target);
  return report;
}

// ---------------------------------------------------------------------------

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const TrialReport& report) {
  out << "trial,output,truth,abs_error,success,queries,unlabeled,millis\n";
  for (const auto& r : report.rows) {
    out << r.trial << ',' << num(r.output) << ',' << num(r.truth) << ','
        << num(r.abs_error) << ',' << (r.success ? 1 : 0) << ',' << r.queries << ','
        << r.unlabeled << ',' << num(r.millis) << '\n';
  }
  const Aggregate& a = report.aggregate;
  out << "# aggregate,trials,successes,success_rate,ci_low,ci_high,required,passed\n";
  out << "# aggregate," << a.trials << ',' << a.successes << ',' << num(a.success_rate)
      << ',' << num(a.ci_low) << ',' << num(a.ci_high) << ',' << a.required << ','
      << (a.passed ? 1 : 0) << '\n';
}

Json report_to_json(const TrialReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"trial", r.trial},         {"output", r.output},
                    {"truth", r.truth},         {"abs_error", r.abs_error},
                    {"success", r.success},     {"queries", r.queries},
                    {"unlabeled", r.unlabeled}, {"millis", r.millis}});
  }
  const Aggregate& a = report.aggregate;
  return Json{{"algorithm", report.algorithm},
              {"rows", rows},
              {"aggregate",
               {{"trials", a.trials},
                {"successes", a.successes},
                {"success_rate", a.success_rate},
                {"ci_low", a.ci_low},
                {"ci_high", a.ci_high},
                {"required", a.required},
                {"passed", a.passed}}}};
}

Aggregate aggregate_from_json(const Json& j) {
  const Json& a = j.at("aggregate");
  Aggregate out;
  out.trials = a.at("trials").get<std::size_t>();
  out.successes = a.at("successes").get<std::size_t>();
  out.success_rate = a.at("success_rate").get<double>();
  out.ci_low = a.at("ci_low").get<double>();
  out.ci_high = a.at("ci_high").get<double>();
  out.required = a.at("required").get<std::size_t>();
  out.passed = a.at("passed").get<bool>();
  return out;
}

void write_report(const std::string& path, const TrialReport& report) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kFormat, "cannot write " + path);
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (json) {
    out << report_to_json(report).dump(2) << '\n';
  } else {
    write_csv(out, report);
  }
}

}  // namespace activetest
