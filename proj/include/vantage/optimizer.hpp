#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "vantage/metrics.hpp"
#include "vantage/sampler.hpp"

namespace vantage {

/// Sorted, distinct indices into the filtered candidate list.
using Chromosome = std::vector<int>;

struct Individual {
  Chromosome genes;
  ObjectiveVector objectives;
  int rank = 0;
  double crowding = 0.0;
};

struct Nsga2Params {
  std::size_t population = 200;
  std::size_t generations = 70;
  double crossover_probability = 0.9;
  double mutation_probability = 0.2;  ///< per slot
  std::size_t tournament_size = 2;
  std::size_t slots = 2;              ///< cameras per combination (supervising robots)
  std::uint64_t seed = 0;

  void validate() const {
    if (population < 4 || population % 2 != 0) throw Error("nsga2: population must be even and at least 4");
    if (crossover_probability < 0.0 || crossover_probability > 1.0)
      throw Error("nsga2: crossover probability outside [0, 1]");
    if (mutation_probability < 0.0 || mutation_probability > 1.0)
      throw Error("nsga2: mutation probability outside [0, 1]");
    if (tournament_size < 1) throw Error("nsga2: tournament size must be at least 1");
    if (slots < 1) throw Error("nsga2: at least one slot required");
  }
};

/// a dominates b: no worse in both objectives, strictly better in one.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  return a.coverage >= b.coverage && a.distance <= b.distance && (a.coverage > b.coverage || a.distance < b.distance);
}

/// Deb's fast non-dominated sort. Indices within a front are ascending.
inline std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectiveVector> objs) {
  const std::size_t n = objs.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> dominator_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(objs[p], objs[q]))
        dominated_by_me[p].push_back(q);
      else if (dominates(objs[q], objs[p]))
        ++dominator_count[p];
    }
    if (dominator_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (auto p : current)
      for (auto q : dominated_by_me[p])
        if (--dominator_count[q] == 0) next.push_back(q);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

/// Crowding distance within one front. Extremes of each objective get +inf;
/// interior members sum normalised neighbour gaps; a zero-range objective adds 0.
inline std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), inf);
    return dist;
  }
  std::vector<std::size_t> order(n);
  for (auto value : {&ObjectiveVector::coverage, &ObjectiveVector::distance}) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return front[a].*value < front[b].*value; });
    const double range = front[order.back()].*value - front[order.front()].*value;
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    if (range <= 0.0) continue;
    for (std::size_t k = 1; k + 1 < n; ++k)
      if (dist[order[k]] != inf) dist[order[k]] += (front[order[k + 1]].*value - front[order[k - 1]].*value) / range;
  }
  return dist;
}

namespace detail {

// Assigns rank and crowding to every member; returns the fronts.
inline std::vector<std::vector<std::size_t>> rank_population(std::vector<Individual>& pop) {
  std::vector<ObjectiveVector> objs;
  objs.reserve(pop.size());
  for (const auto& ind : pop) objs.push_back(ind.objectives);
  auto fronts = fast_nondominated_sort(objs);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    std::vector<ObjectiveVector> f;
    f.reserve(fronts[r].size());
    for (auto i : fronts[r]) f.push_back(objs[i]);
    const auto cd = crowding_distance(f);
    for (std::size_t k = 0; k < fronts[r].size(); ++k) {
      pop[fronts[r][k]].rank = static_cast<int>(r);
      pop[fronts[r][k]].crowding = cd[k];
    }
  }
  return fronts;
}

inline bool crowded_better(const Individual& a, const Individual& b) {
  return a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding);
}

// Replaces repeated genes with indices not yet used, then sorts.
inline void repair(Chromosome& genes, std::size_t candidate_count, std::mt19937_64& rng) {
  std::vector<int> used;
  for (auto& g : genes) {
    if (std::find(used.begin(), used.end(), g) != used.end()) {
      std::sort(used.begin(), used.end());
      std::uniform_int_distribution<std::size_t> draw(0, candidate_count - used.size() - 1);
      int v = static_cast<int>(draw(rng));
      for (int u : used)
        if (v >= u) ++v;
      g = v;
    }
    used.push_back(g);
  }
  std::sort(genes.begin(), genes.end());
}

inline Chromosome random_chromosome(std::size_t candidate_count, std::size_t slots, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> draw(0, static_cast<int>(candidate_count) - 1);
  Chromosome genes(slots);
  for (auto& g : genes) g = draw(rng);
  repair(genes, candidate_count, rng);
  return genes;
}

}  // namespace detail

using GenerationObserver = std::function<void(std::size_t generation, std::span<const Individual> population)>;

/// NSGA-II over fixed-size index combinations. `evaluate(const Chromosome&)`
/// returns the ObjectiveVector. Binary (or k-ary) crowded tournament, uniform
/// slot crossover, per-slot resampling mutation, distinct-index repair and
/// elitist (mu + lambda) survival. Returns the distinct rank-0 members of the
/// final population ordered by coverage desc, distance asc, genes.
template <class Evaluate>
std::vector<Individual> nsga2_run(std::size_t candidate_count, const Nsga2Params& params, Evaluate&& evaluate,
                                  const GenerationObserver& observer = {}) {
  params.validate();
  if (candidate_count < params.slots) throw Error("insufficient candidates");
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> any_index(0, static_cast<int>(candidate_count) - 1);

  std::vector<Individual> pop(params.population);
  for (auto& ind : pop) {
    ind.genes = detail::random_chromosome(candidate_count, params.slots, rng);
    ind.objectives = evaluate(static_cast<const Chromosome&>(ind.genes));
  }
  detail::rank_population(pop);
  if (observer) observer(0, pop);

  std::uniform_int_distribution<std::size_t> pick(0, params.population - 1);
  auto tournament = [&]() -> const Individual& {
    const Individual* best = &pop[pick(rng)];
    for (std::size_t k = 1; k < params.tournament_size; ++k) {
      const Individual* other = &pop[pick(rng)];
      if (detail::crowded_better(*other, *best)) best = other;
    }
    return *best;
  };

  for (std::size_t gen = 1; gen <= params.generations; ++gen) {
    std::vector<Individual> merged = pop;
    merged.reserve(2 * params.population);
    while (merged.size() < 2 * params.population) {
      Chromosome a = tournament().genes;
      Chromosome b = tournament().genes;
      if (u01(rng) < params.crossover_probability)
        for (std::size_t s = 0; s < params.slots; ++s)
          if (u01(rng) < 0.5) std::swap(a[s], b[s]);
      for (Chromosome* child : {&a, &b}) {
        for (auto& g : *child)
          if (u01(rng) < params.mutation_probability) g = any_index(rng);
        detail::repair(*child, candidate_count, rng);
        Individual ind;
        ind.genes = std::move(*child);
        ind.objectives = evaluate(static_cast<const Chromosome&>(ind.genes));
        merged.push_back(std::move(ind));
      }
    }

    auto fronts = detail::rank_population(merged);
    std::vector<Individual> next;
    next.reserve(params.population);
    for (auto& front : fronts) {
      if (next.size() + front.size() <= params.population) {
        for (auto i : front) next.push_back(merged[i]);
        continue;
      }
      std::stable_sort(front.begin(), front.end(),
                       [&](std::size_t a, std::size_t b) { return merged[a].crowding > merged[b].crowding; });
      for (std::size_t k = 0; next.size() < params.population; ++k) next.push_back(merged[front[k]]);
      break;
    }
    pop = std::move(next);
    if (observer) observer(gen, pop);
  }

  std::vector<Individual> front;
  std::set<Chromosome> seen;
  for (const auto& ind : pop)
    if (ind.rank == 0 && seen.insert(ind.genes).second) front.push_back(ind);
  std::sort(front.begin(), front.end(), [](const Individual& a, const Individual& b) {
    if (a.objectives.coverage != b.objectives.coverage) return a.objectives.coverage > b.objectives.coverage;
    if (a.objectives.distance != b.objectives.distance) return a.objectives.distance < b.objectives.distance;
    return a.genes < b.genes;
  });
  return front;
}

/// Fitness of one combination computed straight from the metric definitions:
/// coverage over the joint frusta; object distance when a target exists, else
/// envelope-centroid distance.
inline ObjectiveVector evaluate(const Chromosome& genes, std::span<const CandidateViewpoint> candidates,
                                const MotionEnvelope& envelope, const TargetPointSet* targets = nullptr) {
  std::vector<CameraView> views;
  views.reserve(genes.size());
  for (int g : genes) {
    if (g < 0 || static_cast<std::size_t>(g) >= candidates.size()) throw Error("evaluate: gene out of range");
    views.push_back(candidates[static_cast<std::size_t>(g)].view);
  }
  ObjectiveVector obj;
  obj.coverage = coverage(views, envelope);
  obj.distance = targets ? distance_place(views, *targets) : distance_pick(views, envelope);
  return obj;
}

/// Cached evaluator: one coverage bitmask and one distance term per candidate.
/// Produces the same values as evaluate() with popcounts instead of frustum tests.
class CombinationEvaluator {
 public:
  CombinationEvaluator(std::span<const CandidateViewpoint> candidates, const MotionEnvelope& envelope,
                       const TargetPointSet* targets = nullptr)
      : envelope_size_(envelope.size()) {
    if (envelope.empty()) throw Error("evaluator: empty envelope");
    masks_.reserve(candidates.size());
    distances_.reserve(candidates.size());
    const Vec3 c = centroid(envelope.points);
    std::vector<Vec3> centroids;
    if (targets) centroids = state_centroids(*targets);
    for (const auto& cand : candidates) {
      masks_.push_back(coverage_mask(cand.view, envelope.points));
      distances_.push_back(targets ? object_distance(cand.view, centroids) : (c - cand.view.position()).norm());
    }
  }

  ObjectiveVector operator()(const Chromosome& genes) const {
    boost::dynamic_bitset<> covered(envelope_size_);
    double sum = 0.0;
    for (int g : genes) {
      covered |= masks_[static_cast<std::size_t>(g)];
      sum += distances_[static_cast<std::size_t>(g)];
    }
    return {static_cast<double>(covered.count()) / static_cast<double>(envelope_size_),
            sum / static_cast<double>(genes.size())};
  }

  std::size_t size() const { return masks_.size(); }

 private:
  std::size_t envelope_size_;
  std::vector<boost::dynamic_bitset<>> masks_;
  std::vector<double> distances_;
};

struct SelectionOutcome {
  enum class Kind { Single, Combination };
  Kind kind = Kind::Single;
  Chromosome genes;                      ///< indices into the filtered candidate list
  ObjectiveVector objectives;
  std::optional<double> avg_visibility;  ///< present when a target object exists
  bool below_threshold = false;
};

using VisibilityFn = std::function<double(const Chromosome&)>;

/// Merges the NSGA-II front with single-view solutions, keeps the merged rank-0
/// set, filters it by `coverage_threshold`, then picks the highest visibility
/// (target present) or highest coverage. Ties: smaller distance, then smaller
/// genes. When nothing reaches the threshold, the highest-coverage rank-0
/// member comes back flagged `below_threshold`.
inline SelectionOutcome select_final(std::span<const Individual> pareto, std::span<const Individual> singles,
                                     double coverage_threshold, const VisibilityFn& visibility = {}) {
  std::vector<Individual> merged;
  std::set<Chromosome> seen;
  for (auto group : {pareto, singles})
    for (const auto& ind : group)
      if (seen.insert(ind.genes).second) merged.push_back(ind);
  if (merged.empty()) throw Error("select_final: no solutions to choose from");

  std::vector<ObjectiveVector> objs;
  for (const auto& m : merged) objs.push_back(m.objectives);
  const auto fronts = fast_nondominated_sort(objs);

  std::vector<const Individual*> feasible;
  for (auto i : fronts.front())
    if (merged[i].objectives.coverage >= coverage_threshold) feasible.push_back(&merged[i]);

  auto finish = [](const Individual& ind) {
    SelectionOutcome out;
    out.kind = ind.genes.size() == 1 ? SelectionOutcome::Kind::Single : SelectionOutcome::Kind::Combination;
    out.genes = ind.genes;
    out.objectives = ind.objectives;
    return out;
  };
  auto tie_break = [](const Individual& a, const Individual& b) {
    if (a.objectives.distance != b.objectives.distance) return a.objectives.distance < b.objectives.distance;
    return a.genes < b.genes;
  };
  auto by_coverage = [&](const Individual* a, const Individual* b) {
    if (a->objectives.coverage != b->objectives.coverage) return a->objectives.coverage > b->objectives.coverage;
    return tie_break(*a, *b);
  };

  if (feasible.empty()) {
    std::vector<const Individual*> front0;
    for (auto i : fronts.front()) front0.push_back(&merged[i]);
    const Individual* best = *std::min_element(front0.begin(), front0.end(), by_coverage);
    SelectionOutcome out = finish(*best);
    out.below_threshold = true;
    if (visibility) out.avg_visibility = visibility(best->genes);
    return out;
  }

  if (!visibility) return finish(**std::min_element(feasible.begin(), feasible.end(), by_coverage));

  const Individual* best = nullptr;
  double best_vis = -1.0;
  for (const Individual* ind : feasible) {
    const double vis = visibility(ind->genes);
    if (!best || vis > best_vis || (vis == best_vis && tie_break(*ind, *best))) {
      best = ind;
      best_vis = vis;
    }
  }
  SelectionOutcome out = finish(*best);
  out.avg_visibility = best_vis;
  return out;
}

}  // namespace vantage
