#include "aeen/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "aeen/mat.hpp"
#include "aeen/rng.hpp"

namespace aeen {

void SearchSpace::validate() const {
  require(lr_lo > 0.0 && lr_lo < lr_hi, "SearchSpace: invalid lr bounds");
  require(xi_lo > 0.0 && xi_lo < xi_hi, "SearchSpace: invalid xi bounds");
  require(gamma_lo > 0.0 && gamma_lo < gamma_hi,
          "SearchSpace: invalid gamma bounds");
}

StagePlan StagePlan::default_plan() {
  return StagePlan{{{100, 1}, {10, 10}, {1, 30}}};
}

void StagePlan::validate() const {
  require(!stages.empty(), "StagePlan: no stages");
  int prev = stages.front().num_configs;
  for (const Stage& s : stages) {
    require(s.num_configs >= 1, "StagePlan: num_configs must be >= 1");
    require(s.epochs >= 1, "StagePlan: epochs must be >= 1");
    require(s.num_configs <= prev,
            "StagePlan: num_configs must be non-increasing across stages");
    prev = s.num_configs;
  }
}

long long StagePlan::total_trial_epochs() const {
  long long total = 0;
  for (const Stage& s : stages)
    total += static_cast<long long>(s.num_configs) * s.epochs;
  return total;
}

std::vector<HyperConfig> sample_configs(const SearchSpace& space, int count,
                                        uint64_t seed) {
  space.validate();
  require(count >= 1, "sample_configs: count must be >= 1");
  Rng rng(seed);
  std::vector<HyperConfig> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    HyperConfig c;
    c.lr_max = rng.log_uniform(space.lr_lo, space.lr_hi);
    c.xi = rng.log_uniform(space.xi_lo, space.xi_hi);
    c.gamma = rng.uniform(space.gamma_lo, space.gamma_hi);
    out.push_back(c);
  }
  return out;
}

std::vector<TrialResult> run_stage(
    const std::vector<std::pair<int, HyperConfig>>& configs, int stage,
    int epochs, const Evaluator& evaluator, uint64_t master_seed, int jobs) {
  require(!configs.empty(), "run_stage: no configs");
  require(epochs >= 1, "run_stage: epochs must be >= 1");
  require(static_cast<bool>(evaluator), "run_stage: missing evaluator");

  std::vector<TrialResult> results(configs.size());
  auto run_one = [&](size_t slot) {
    TrialResult t;
    t.stage = stage;
    t.config_index = configs[slot].first;
    t.config = configs[slot].second;
    t.epochs = epochs;
    t.seed = mix_seed(master_seed, static_cast<uint64_t>(t.config_index));
    try {
      const double acc = evaluator(t.config, epochs, t.seed);
      if (!std::isfinite(acc))
        throw std::runtime_error("evaluator returned a non-finite accuracy");
      t.accuracy = std::clamp(acc, 0.0, 1.0);
    } catch (const std::exception& e) {
      t.accuracy = 0.0;
      t.error = e.what();
    }
    results[slot] = std::move(t);
  };

  if (jobs <= 1 || configs.size() == 1) {
    for (size_t i = 0; i < configs.size(); ++i) run_one(i);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t i = next.fetch_add(1); i < configs.size();
           i = next.fetch_add(1))
        run_one(i);
    };
    std::vector<std::thread> pool;
    const size_t n_threads =
        std::min(static_cast<size_t>(jobs), configs.size());
    pool.reserve(n_threads);
    for (size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  std::sort(results.begin(), results.end(),
            [](const TrialResult& a, const TrialResult& b) {
              if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
              return a.config_index < b.config_index;
            });
  return results;
}

SearchResult search(const SearchSpace& space, const StagePlan& plan,
                    const Evaluator& evaluator, uint64_t master_seed,
                    int jobs) {
  plan.validate();
  const std::vector<HyperConfig> sampled =
      sample_configs(space, plan.stages.front().num_configs, master_seed);

  std::vector<std::pair<int, HyperConfig>> current;
  current.reserve(sampled.size());
  for (size_t i = 0; i < sampled.size(); ++i)
    current.emplace_back(static_cast<int>(i), sampled[i]);

  SearchResult res;
  for (size_t s = 0; s < plan.stages.size(); ++s) {
    const std::vector<TrialResult> ranked =
        run_stage(current, static_cast<int>(s), plan.stages[s].epochs,
                  evaluator, master_seed, jobs);
    res.audit.insert(res.audit.end(), ranked.begin(), ranked.end());
    if (s + 1 < plan.stages.size()) {
      const size_t keep = static_cast<size_t>(plan.stages[s + 1].num_configs);
      current.clear();
      for (size_t i = 0; i < keep; ++i)
        current.emplace_back(ranked[i].config_index, ranked[i].config);
    } else {
      res.final_trial = ranked.front();
      res.best = ranked.front().config;
    }
  }
  return res;
}

std::string trial_to_json(const TrialResult& t) {
  nlohmann::json j{{"stage", t.stage},
                   {"config_index", t.config_index},
                   {"lr_max", t.config.lr_max},
                   {"xi", t.config.xi},
                   {"gamma", t.config.gamma},
                   {"seed", t.seed},
                   {"epochs", t.epochs},
                   {"accuracy", t.accuracy}};
  if (!t.error.empty()) j["error"] = t.error;
  return j.dump();
}

}  // namespace aeen
