#include "lanepareto/nsga2.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace lanepareto {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool ParetoDominates(const Objectives& a, const Objectives& b) {
  bool strictly = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
    if (a[k] < b[k]) strictly = true;
  }
  return strictly;
}

int ResolveThreads(int requested) {
  int threads = requested;
  if (threads <= 0) {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  if (const char* cap = std::getenv("LANE_PARETO_THREADS")) {
    const int limit = std::atoi(cap);
    if (limit > 0) threads = std::min(threads, limit);
  }
  return std::max(threads, 1);
}

std::string DescribeCandidate(const std::vector<double>& values) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << (i ? ", " : "") << values[i];
  }
  out << "]";
  return out.str();
}

// Evaluates every genome missing from the cache. Results are committed in
// first-appearance order so scheduling cannot change the evolution path.
class CachedEvaluator {
 public:
  CachedEvaluator(const Evaluator& evaluator, const DecisionSpace& space,
                  int threads)
      : evaluator_(evaluator), space_(space), threads_(threads) {}

  void EvaluateAll(std::vector<Individual>& batch) {
    std::vector<const Genome*> pending;
    std::map<Genome, std::size_t> pending_index;
    for (const auto& ind : batch) {
      if (cache_.count(ind.genome) || pending_index.count(ind.genome)) continue;
      pending_index.emplace(ind.genome, pending.size());
      pending.push_back(&ind.genome);
    }
    std::vector<Evaluation> results(pending.size());
    std::vector<std::exception_ptr> errors(pending.size());
    auto work = [&](std::size_t i) {
      try {
        results[i] = evaluator_(space_.Values(*pending[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    };
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads_), pending.size());
    if (workers <= 1) {
      for (std::size_t i = 0; i < pending.size(); ++i) work(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < pending.size(); i = next++) work(i);
        });
      }
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (errors[i]) {
        const auto values = space_.Values(*pending[i]);
        try {
          std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
          throw EvaluationError("evaluation failed for candidate " +
                                    DescribeCandidate(values) + ": " + e.what(),
                                values);
        }
      }
      best_violation_ = std::min(best_violation_, results[i].violation);
      cache_.emplace(*pending[i], results[i]);
    }
    for (auto& ind : batch) ind.eval = cache_.at(ind.genome);
  }

  std::size_t size() const { return cache_.size(); }
  double best_violation() const { return best_violation_; }

 private:
  const Evaluator& evaluator_;
  const DecisionSpace& space_;
  int threads_;
  std::map<Genome, Evaluation> cache_;
  double best_violation_ = kInf;
};

// Assigns rank and crowding to every member; returns the fronts.
std::vector<std::vector<std::size_t>> RankAndCrowd(
    std::vector<Individual>& pop) {
  std::vector<Evaluation> evals;
  evals.reserve(pop.size());
  for (const auto& ind : pop) evals.push_back(ind.eval);
  const auto ranks = FastNondominatedSort(evals);
  int max_rank = 0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    pop[i].rank = ranks[i];
    max_rank = std::max(max_rank, ranks[i]);
  }
  std::vector<std::vector<std::size_t>> fronts(
      static_cast<std::size_t>(max_rank) + 1);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    fronts[static_cast<std::size_t>(ranks[i])].push_back(i);
  }
  for (const auto& front : fronts) {
    std::vector<Objectives> objs;
    objs.reserve(front.size());
    for (std::size_t i : front) objs.push_back(pop[i].eval.objectives);
    const auto crowd = CrowdingDistance(objs);
    for (std::size_t k = 0; k < front.size(); ++k) {
      pop[front[k]].crowding = crowd[k];
    }
  }
  return fronts;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::UniformInt(std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(engine_() % span);
}

Rng Rng::Split(std::uint64_t stream) { return Rng(engine_(), stream); }

DecisionSpace::DecisionSpace(std::vector<GeneRange> ranges, double step)
    : step_(step) {
  if (!(step > 0.0)) throw Error("grid step must be positive");
  for (const auto& r : ranges) {
    const auto lo = static_cast<std::int64_t>(std::ceil(r.lower / step - 1e-9));
    const auto hi = static_cast<std::int64_t>(std::floor(r.upper / step + 1e-9));
    if (hi < lo) throw Error("gene range contains no grid point");
    lower_.push_back(lo);
    upper_.push_back(hi);
  }
}

std::vector<double> DecisionSpace::Values(const Genome& g) const {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = Value(g, i);
  return out;
}

std::int64_t DecisionSpace::Snap(std::size_t i, double value) const {
  const auto idx = static_cast<std::int64_t>(std::llround(value / step_));
  return std::clamp(idx, lower_[i], upper_[i]);
}

Genome DecisionSpace::SnapAll(std::span<const double> values) const {
  Genome g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) g[i] = Snap(i, values[i]);
  return g;
}

bool ConstraintDominates(const Evaluation& a, const Evaluation& b) {
  const bool fa = a.feasible(), fb = b.feasible();
  if (fa && !fb) return true;
  if (!fa && fb) return false;
  if (!fa) return a.violation < b.violation;
  return ParetoDominates(a.objectives, b.objectives);
}

std::vector<int> FastNondominatedSort(std::span<const Evaluation> population) {
  const std::size_t n = population.size();
  for (const auto& e : population) {
    for (double o : e.objectives) {
      if (std::isnan(o)) throw Error("NaN objective in population");
    }
    if (std::isnan(e.violation)) throw Error("NaN violation in population");
  }
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<int> dominators(n, 0);
  std::vector<int> rank(n, 0);
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (ConstraintDominates(population[p], population[q])) {
        dominated[p].push_back(q);
        ++dominators[q];
      } else if (ConstraintDominates(population[q], population[p])) {
        dominated[q].push_back(p);
        ++dominators[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (dominators[p] == 0) current.push_back(p);
  }
  int front = 0;
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      rank[p] = front;
      for (std::size_t q : dominated[p]) {
        if (--dominators[q] == 0) next.push_back(q);
      }
    }
    ++front;
    current = std::move(next);
  }
  return rank;
}

std::vector<double> CrowdingDistance(std::span<const Objectives> front) {
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) return std::vector<double>(n, kInf);
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < Objectives{}.size(); ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return front[a][k] < front[b][k];
    });
    const double range = front[order.back()][k] - front[order.front()][k];
    if (!(range > 0.0)) continue;
    dist[order.front()] = kInf;
    dist[order.back()] = kInf;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      dist[order[i]] +=
          (front[order[i + 1]][k] - front[order[i - 1]][k]) / range;
    }
  }
  return dist;
}

std::size_t TournamentSelect(std::span<const Individual> population, Rng& rng) {
  const auto last = static_cast<std::int64_t>(population.size()) - 1;
  const auto a = static_cast<std::size_t>(rng.UniformInt(0, last));
  const auto b = static_cast<std::size_t>(rng.UniformInt(0, last));
  const auto& ia = population[a];
  const auto& ib = population[b];
  if (ia.rank != ib.rank) return ia.rank < ib.rank ? a : b;
  if (ia.crowding != ib.crowding) return ia.crowding > ib.crowding ? a : b;
  return rng.Coin() ? a : b;
}

std::pair<Genome, Genome> Vary(const Genome& p1, const Genome& p2,
                               const DecisionSpace& space,
                               const VariationParams& params, Rng& rng) {
  const std::size_t n = space.size();
  std::vector<double> c1(n), c2(n);
  for (std::size_t i = 0; i < n; ++i) {
    c1[i] = space.Value(p1, i);
    c2[i] = space.Value(p2, i);
  }

  if (rng.Uniform() < params.crossover_prob) {
    const double inv = 1.0 / (params.eta_c + 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.Uniform() >= 0.5) continue;
      const double lo = space.lower(i), hi = space.upper(i);
      if (std::abs(c1[i] - c2[i]) <= 1e-14 || !(hi > lo)) continue;
      const double y1 = std::min(c1[i], c2[i]);
      const double y2 = std::max(c1[i], c2[i]);
      const double u = rng.Uniform();
      auto spread = [&](double beta) {
        const double alpha = 2.0 - std::pow(beta, -(params.eta_c + 1.0));
        return u <= 1.0 / alpha ? std::pow(u * alpha, inv)
                                : std::pow(1.0 / (2.0 - u * alpha), inv);
      };
      const double bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
      const double bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
      double a = std::clamp(0.5 * ((y1 + y2) - bq1 * (y2 - y1)), lo, hi);
      double b = std::clamp(0.5 * ((y1 + y2) + bq2 * (y2 - y1)), lo, hi);
      if (rng.Coin()) std::swap(a, b);
      c1[i] = a;
      c2[i] = b;
    }
  }

  const double inv_m = 1.0 / (params.eta_m + 1.0);
  for (auto* child : {&c1, &c2}) {
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.Uniform() >= params.mutation_prob) continue;
      const double lo = space.lower(i), hi = space.upper(i);
      if (!(hi > lo)) continue;
      double& y = (*child)[i];
      const double d1 = (y - lo) / (hi - lo);
      const double d2 = (hi - y) / (hi - lo);
      const double u = rng.Uniform();
      double dq;
      if (u <= 0.5) {
        const double val = 2.0 * u + (1.0 - 2.0 * u) *
                                         std::pow(1.0 - d1, params.eta_m + 1.0);
        dq = std::pow(val, inv_m) - 1.0;
      } else {
        const double val = 2.0 * (1.0 - u) +
                           2.0 * (u - 0.5) *
                               std::pow(1.0 - d2, params.eta_m + 1.0);
        dq = 1.0 - std::pow(val, inv_m);
      }
      y = std::clamp(y + dq * (hi - lo), lo, hi);
    }
  }
  return {space.SnapAll(c1), space.SnapAll(c2)};
}

void Validate(const NsgaParams& p) {
  if (p.population < 4 || p.population % 2 != 0) {
    throw ConfigError("nsga_params.population", "must be even and >= 4");
  }
  if (p.generations < 1) {
    throw ConfigError("nsga_params.generations", "must be >= 1");
  }
  if (!(p.crossover_prob >= 0.0 && p.crossover_prob <= 1.0)) {
    throw ConfigError("nsga_params.crossover_prob", "must lie in [0, 1]");
  }
  if (!(p.mutation_prob <= 1.0)) {
    throw ConfigError("nsga_params.mutation_prob", "must be <= 1");
  }
  if (!(p.eta_c >= 0.0) || !(p.eta_m >= 0.0)) {
    throw ConfigError("nsga_params.eta", "distribution indices must be >= 0");
  }
}

ParetoFront Evolve(const Evaluator& evaluator, const DecisionSpace& space,
                   const NsgaParams& params,
                   const GenerationObserver& observer) {
  Validate(params);
  const auto pop_size = static_cast<std::size_t>(params.population);
  Rng rng(params.seed);
  const VariationParams variation{
      params.crossover_prob,
      params.mutation_prob < 0.0 ? 1.0 / static_cast<double>(space.size())
                                 : params.mutation_prob,
      params.eta_c, params.eta_m};
  CachedEvaluator cache(evaluator, space, ResolveThreads(params.threads));

  std::vector<Individual> pop(pop_size);
  for (auto& ind : pop) {
    ind.genome.resize(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
      ind.genome[i] = rng.UniformInt(space.lower_index(i), space.upper_index(i));
    }
  }
  cache.EvaluateAll(pop);
  RankAndCrowd(pop);
  if (observer) observer(0, pop);

  for (int gen = 1; gen <= params.generations; ++gen) {
    std::vector<Individual> merged = pop;
    merged.reserve(2 * pop_size);
    while (merged.size() < 2 * pop_size) {
      const auto& a = pop[TournamentSelect(pop, rng)];
      const auto& b = pop[TournamentSelect(pop, rng)];
      auto [c1, c2] = Vary(a.genome, b.genome, space, variation, rng);
      merged.push_back({std::move(c1), {}, 0, 0.0});
      if (merged.size() < 2 * pop_size) merged.push_back({std::move(c2), {}, 0, 0.0});
    }
    {
      std::vector<Individual> offspring(merged.begin() + pop_size, merged.end());
      cache.EvaluateAll(offspring);
      std::move(offspring.begin(), offspring.end(), merged.begin() + pop_size);
    }
    const auto fronts = RankAndCrowd(merged);

    std::vector<Individual> next;
    next.reserve(pop_size);
    for (const auto& front : fronts) {
      if (next.size() + front.size() <= pop_size) {
        for (std::size_t i : front) next.push_back(merged[i]);
        continue;
      }
      std::vector<std::size_t> order = front;
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return merged[a].crowding > merged[b].crowding;
      });
      for (std::size_t i : order) {
        if (next.size() == pop_size) break;
        next.push_back(merged[i]);
      }
      break;
    }
    pop = std::move(next);
    RankAndCrowd(pop);
    if (observer) observer(gen, pop);
  }

  ParetoFront result;
  result.evaluations = cache.size();
  result.best_violation = cache.best_violation();
  std::map<Genome, bool> seen;
  for (const auto& ind : pop) {
    if (ind.rank != 0 || !ind.eval.feasible()) continue;
    if (!seen.emplace(ind.genome, true).second) continue;
    result.members.push_back(ind);
  }
  std::vector<Objectives> objs;
  for (const auto& m : result.members) objs.push_back(m.eval.objectives);
  const auto crowd = CrowdingDistance(objs);
  for (std::size_t i = 0; i < result.members.size(); ++i) {
    result.members[i].crowding = crowd[i];
  }
  if (!result.members.empty()) result.selected = SelectSolution(result.members);
  return result;
}

std::size_t SelectSolution(std::span<const Individual> front) {
  if (front.empty()) throw Error("cannot select from an empty front");
  std::size_t best = 0;
  for (std::size_t i = 1; i < front.size(); ++i) {
    const auto& a = front[i].eval.objectives;
    const auto& b = front[best].eval.objectives;
    const double da = std::hypot(a[0], a[1]);
    const double db = std::hypot(b[0], b[1]);
    if (da < db || (da == db && (a[1] < b[1] || (a[1] == b[1] && a[0] < b[0])))) {
      best = i;
    }
  }
  return best;
}

std::size_t LeftmostSolution(std::span<const Individual> front) {
  if (front.empty()) throw Error("cannot select from an empty front");
  std::size_t best = 0;
  for (std::size_t i = 1; i < front.size(); ++i) {
    const auto& a = front[i].eval.objectives;
    const auto& b = front[best].eval.objectives;
    if (a[0] < b[0] || (a[0] == b[0] && a[1] < b[1])) best = i;
  }
  return best;
}

void Validate(const DecisionBounds& b) {
  if (!(b.t_wait_max >= 0.0)) {
    throw ConfigError("bounds.t_wait_max", "must be >= 0");
  }
  if (!(b.a_end_min <= b.a_end_max)) {
    throw ConfigError("bounds.a_end_min/bounds.a_end_max",
                      "lower bound exceeds upper bound");
  }
}

DecisionSpace LcDecisionSpace(const KinematicBounds& k,
                              const DecisionBounds& d) {
  return DecisionSpace({{0.0, d.t_wait_max},
                        {k.t_lc_min, k.t_lc_max},
                        {k.x_lc_min, k.x_lc_max},
                        {k.v_min, k.v_max},
                        {d.a_end_min, d.a_end_max}});
}

LcCandidate ToCandidate(std::span<const double> v) {
  if (v.size() != 5) throw Error("lane-change candidate needs five values");
  return {v[0], v[1], v[2], v[3], v[4]};
}

std::array<double, 5> ToValues(const LcCandidate& c) {
  return {c.t_wait, c.duration, c.x_disp, c.v_end, c.a_end};
}

std::string FrontToJson(std::span<const Individual> front,
                        const DecisionSpace& space,
                        std::optional<std::size_t> selected,
                        std::optional<std::size_t> baseline) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < front.size(); ++i) {
    const auto& m = front[i];
    const auto c = ToCandidate(space.Values(m.genome));
    nlohmann::json entry = {
        {"t_wait", c.t_wait},
        {"duration", c.duration},
        {"x_disp", c.x_disp},
        {"v_end", c.v_end},
        {"a_end", c.a_end},
        {"J_LC", m.eval.objectives[0]},
        {"J_TF", m.eval.objectives[1]},
        {"violation", m.eval.violation},
        {"rank", m.rank},
        {"crowding", nullptr},
        {"selected", selected && *selected == i},
        {"baseline", baseline && *baseline == i}};
    if (std::isfinite(m.crowding)) entry["crowding"] = m.crowding;
    out.push_back(std::move(entry));
  }
  return out.dump(2) + "\n";
}

}  // namespace lanepareto
