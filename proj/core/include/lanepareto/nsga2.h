#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lanepareto/errors.h"
#include "lanepareto/trajectory.h"

namespace lanepareto {

inline constexpr double kGridStep = 0.1;

// Seedable, splittable generator. Every stochastic draw of the optimiser goes
// through an explicitly passed instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double Uniform();  // [0, 1)
  // Inclusive range.
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi);
  bool Coin() { return Uniform() < 0.5; }
  Rng Split(std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

// Decision vectors live on an integer grid: gene i has value index * step.
using Genome = std::vector<std::int64_t>;

struct GeneRange {
  double lower = 0.0;
  double upper = 0.0;
};

class DecisionSpace {
 public:
  DecisionSpace(std::vector<GeneRange> ranges, double step = kGridStep);

  std::size_t size() const { return lower_.size(); }
  double step() const { return step_; }
  std::int64_t lower_index(std::size_t i) const { return lower_[i]; }
  std::int64_t upper_index(std::size_t i) const { return upper_[i]; }
  double lower(std::size_t i) const { return lower_[i] * step_; }
  double upper(std::size_t i) const { return upper_[i] * step_; }

  double Value(const Genome& g, std::size_t i) const { return g[i] * step_; }
  std::vector<double> Values(const Genome& g) const;
  // Nearest grid point, clamped into range.
  std::int64_t Snap(std::size_t i, double value) const;
  Genome SnapAll(std::span<const double> values) const;

 private:
  std::vector<std::int64_t> lower_;
  std::vector<std::int64_t> upper_;
  double step_;
};

using Objectives = std::array<double, 2>;

struct Evaluation {
  Objectives objectives{};
  double violation = 0.0;

  bool feasible() const { return violation <= 0.0; }
};

struct Individual {
  Genome genome;
  Evaluation eval;
  int rank = 0;
  double crowding = 0.0;
};

// Feasible beats infeasible, lower violation beats higher among infeasible,
// Pareto dominance among feasible.
bool ConstraintDominates(const Evaluation& a, const Evaluation& b);

// Front index per member (0 = non-dominated). Throws Error on NaN.
std::vector<int> FastNondominatedSort(std::span<const Evaluation> population);

std::vector<double> CrowdingDistance(std::span<const Objectives> front);

// Binary tournament on (rank, crowding); index into `population`.
std::size_t TournamentSelect(std::span<const Individual> population, Rng& rng);

struct VariationParams {
  double crossover_prob = 0.9;
  double mutation_prob = 0.2;  // per gene
  double eta_c = 15.0;
  double eta_m = 20.0;
};

// Simulated binary crossover followed by polynomial mutation in continuous
// space, then snapped back to the grid.
std::pair<Genome, Genome> Vary(const Genome& p1, const Genome& p2,
                               const DecisionSpace& space,
                               const VariationParams& params, Rng& rng);

struct NsgaParams {
  int population = 60;
  int generations = 80;
  double crossover_prob = 0.9;
  // Per-gene mutation probability; a negative value means 1 / gene count.
  double mutation_prob = -1.0;
  double eta_c = 15.0;
  double eta_m = 20.0;
  std::uint64_t seed = 1;
  // Worker threads for candidate evaluation; 0 picks hardware concurrency
  // capped by LANE_PARETO_THREADS.
  int threads = 0;
};

void Validate(const NsgaParams& p);

struct ParetoFront {
  std::vector<Individual> members;
  std::size_t selected = 0;
  // Lowest violation seen across all evaluations.
  double best_violation = 0.0;
  std::size_t evaluations = 0;

  bool empty() const { return members.empty(); }
};

using Evaluator = std::function<Evaluation(std::span<const double>)>;
using GenerationObserver =
    std::function<void(int generation, std::span<const Individual>)>;

class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::vector<double> candidate)
      : Error(what), candidate_(std::move(candidate)) {}
  const std::vector<double>& candidate() const { return candidate_; }

 private:
  std::vector<double> candidate_;
};

// Elitist NSGA-II. Returns the deduplicated feasible rank-0 set of the final
// population, with `selected` set by SelectSolution when non-empty.
ParetoFront Evolve(const Evaluator& evaluator, const DecisionSpace& space,
                   const NsgaParams& params,
                   const GenerationObserver& observer = {});

// Nearest point to the origin; ties prefer lower J_TF, then lower J_LC.
// Throws Error on an empty front.
std::size_t SelectSolution(std::span<const Individual> front);

// Leftmost point (lowest first objective, ties on the second).
std::size_t LeftmostSolution(std::span<const Individual> front);

// Lane-change decision vector.
struct LcCandidate {
  double t_wait = 0.0;  // s, t_start - t0
  double duration = 0.0;  // s, t_end - t_start
  double x_disp = 0.0;  // m, x_end - x_start
  double v_end = 0.0;   // m/s
  double a_end = 0.0;   // m/s^2
};

struct DecisionBounds {
  double t_wait_max = 10.0;
  double a_end_min = -2.0;
  double a_end_max = 2.0;
};

void Validate(const DecisionBounds& b);

DecisionSpace LcDecisionSpace(const KinematicBounds& kinematic,
                              const DecisionBounds& decision);
LcCandidate ToCandidate(std::span<const double> values);
std::array<double, 5> ToValues(const LcCandidate& c);

// JSON array of front members with their candidate fields. Infinite
// crowding is written as null.
std::string FrontToJson(std::span<const Individual> front,
                        const DecisionSpace& space,
                        std::optional<std::size_t> selected,
                        std::optional<std::size_t> baseline);

}  // namespace lanepareto
