#include "mcn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mcn/performance.hpp"

namespace mcn {

std::string CandidateStructure::encoding() const {
  return to_string(lattice) + "|" + motif.to_string();
}

namespace {

int horizon_steps(const ConstellationConfig& cfg, const DesignSpace& space) {
  return static_cast<int>(std::ceil(space.horizon_periods * cfg.period() / space.dynamics.step - 1e-9));
}

std::vector<ConnectionFeature> union_features(const std::vector<const CandidateStructure*>& group) {
  std::set<ConnectionFeature> feats;
  for (const auto* c : group)
    for (const auto& f : c->motif.pattern().all_features()) feats.insert(f);
  return {feats.begin(), feats.end()};
}

}  // namespace

ObjectiveEvaluator::ObjectiveEvaluator(DesignSpace space) : space_(std::move(space)) {
  space_.dynamics.validate();
  if (space_.motifs.empty()) throw ValidationError("design space has no motifs");
  if (space_.lattices.empty()) throw ValidationError("design space has no lattices");
  if (!(space_.horizon_periods > 0.0)) throw ValidationError("objective horizon must be > 0");

  std::map<std::string, CandidateStructure> unique;
  for (auto lattice : space_.lattices) {
    for (const auto& motif : space_.motifs) {
      if (!lattice_compatible(lattice, motif.grid_mode())) continue;
      try {
        auto cfg = prm_gen(space_.base, space_.max_sats, lattice, motif.grid_mode(), &motif.pattern());
        build_topology(cfg, motif, space_.capacity_gbps);
        CandidateStructure c{motif, lattice, cfg};
        unique.emplace(c.encoding(), std::move(c));
      } catch (const ValidationError&) {
        // Not buildable under this lattice; left out of the space.
      }
    }
  }
  for (auto& [key, c] : unique) candidates_.push_back(std::move(c));

  // One normalisation range across every candidate edge keeps scores comparable.
  std::vector<std::pair<ConstellationConfig, std::vector<const CandidateStructure*>>> groups;
  for (const auto& c : candidates_) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == c.config; });
    if (it == groups.end()) groups.push_back({c.config, {&c}});
    else it->second.push_back(&c);
  }
  for (const auto& [cfg, group] : groups) {
    const auto feats = union_features(group);
    AsrField field(cfg, feats, space_.dynamics.step, horizon_steps(cfg, space_));
    normalizer_.merge(field.range());
  }
}

std::optional<CandidateStructure> ObjectiveEvaluator::candidate(const Motif& motif,
                                                                LatticeKind lattice) const {
  const std::string key = to_string(lattice) + "|" + motif.to_string();
  for (const auto& c : candidates_)
    if (c.encoding() == key) return c;
  return std::nullopt;
}

ObjectiveReport ObjectiveEvaluator::evaluate(const CandidateStructure& c) {
  const std::string key = c.encoding();
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  ++evaluations_;

  const auto graph = build_topology(c.config, c.motif, space_.capacity_gbps);
  const auto feats = c.motif.pattern().all_features();
  const int steps = horizon_steps(c.config, space_);
  AsrField field(c.config, feats, space_.dynamics.step, steps);
  AvailabilityModel model = space_.dynamics;
  model.seed = derive_seed(space_.dynamics.seed, key);
  const auto trace = simulate_availability(graph, field, normalizer_, model, steps * model.step);

  ObjectiveReport r;
  r.mean_availability = mean_availability(trace);
  r.mean_isl_length = period_mean_edge_length(graph, space_.length_samples);
  r.score = r.mean_availability / r.mean_isl_length;
  cache_.emplace(key, r);
  return r;
}

bool better_candidate(const ObjectiveReport& a, const std::string& a_key, const ObjectiveReport& b,
                      const std::string& b_key) {
  if (a.score != b.score) return a.score > b.score;
  return a_key < b_key;
}

void OptimizerConfig::validate() const {
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (lattices.empty()) throw ValidationError("optimizer needs at least one target lattice");
  if (merge_count < 1 || split_count < 1)
    throw ValidationError("merge and split counts must be >= 1");
}

std::vector<int> solution_update(const std::vector<int>& assignment, int merge_count,
                                 int split_count, int candidate_count, Rng& rng) {
  if (assignment.empty() || candidate_count < 1) return assignment;
  const int m = static_cast<int>(assignment.size());
  const int q = std::min(merge_count, m);
  const int start = static_cast<int>(rng.uniform() * m);

  std::set<int> merged;
  std::vector<int> kept;
  for (int i = 0; i < m; ++i) {
    const int offset = ((i - start) % m + m) % m;
    if (offset < q) merged.insert(assignment[i]);
    else kept.push_back(assignment[i]);
  }

  // Re-split the merged block; each part prefers a motif the block did not already use.
  std::vector<int> fresh;
  for (int c = 0; c < candidate_count; ++c)
    if (!merged.count(c)) fresh.push_back(c);
  std::vector<int> parts;
  for (int k = 0; k < split_count; ++k) {
    if (fresh.empty()) {
      parts.push_back(*std::next(merged.begin(), static_cast<long>(rng.uniform() * merged.size())));
    } else {
      parts.push_back(fresh[static_cast<std::size_t>(rng.uniform() * fresh.size())]);
    }
  }
  const int insert_at = std::min(start, static_cast<int>(kept.size()));
  kept.insert(kept.begin() + insert_at, parts.begin(), parts.end());
  return kept;
}

OptimizationResult smlopt(ObjectiveEvaluator& evaluator, const OptimizerConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, "smlopt"));
  std::optional<CandidateStructure> best;
  ObjectiveReport best_report;
  std::vector<IterationLogEntry> log;

  for (auto lattice : config.lattices) {
    std::vector<CandidateStructure> pool;
    for (const auto& c : evaluator.candidates())
      if (c.lattice == lattice) pool.push_back(c);
    if (pool.empty()) continue;
    const int count = static_cast<int>(pool.size());

    // Identical motifs everywhere: the assignment collapses to a single motif index.
    std::vector<int> current{static_cast<int>(rng.uniform() * count)};
    auto cur_report = evaluator.evaluate(pool[current[0]]);
    for (int it = 0; it < config.max_iterations; ++it) {
      auto next = solution_update(current, config.merge_count, config.split_count, count, rng);
      next.assign(1, next.front());
      const auto& proposal = pool[next[0]];
      const auto report = evaluator.evaluate(proposal);
      const bool accept =
          better_candidate(report, proposal.encoding(), cur_report, pool[current[0]].encoding());
      if (accept) {
        current = next;
        cur_report = report;
      }
      log.push_back({lattice, it, proposal.encoding(), report.score, accept,
                     pool[current[0]].encoding(), cur_report.score});
    }
    const auto& winner = pool[current[0]];
    if (!best || better_candidate(cur_report, winner.encoding(), best_report, best->encoding())) {
      best = winner;
      best_report = cur_report;
    }
  }
  if (!best) throw Infeasible("no candidate structure is buildable for the requested lattices");
  return {*best, best_report, std::move(log)};
}

BruteForceResult brute_force_best(ObjectiveEvaluator& evaluator, std::size_t max_candidates) {
  const auto& cands = evaluator.candidates();
  if (cands.empty()) throw Infeasible("no candidate structure is buildable");
  if (cands.size() > max_candidates)
    throw ValidationError("candidate space of " + std::to_string(cands.size()) +
                          " exceeds the brute-force budget of " + std::to_string(max_candidates));
  BruteForceResult res{cands.front(), evaluator.evaluate(cands.front()), {}};
  for (const auto& c : cands) {
    const auto r = evaluator.evaluate(c);
    res.evaluated.emplace_back(c, r);
    if (better_candidate(r, c.encoding(), res.report, res.best.encoding())) {
      res.best = c;
      res.report = r;
    }
  }
  return res;
}

std::vector<FrontierPoint> pareto_frontier(std::vector<FrontierPoint> points) {
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    if (a.mean_isl_length != b.mean_isl_length) return a.mean_isl_length < b.mean_isl_length;
    if (a.mean_availability != b.mean_availability) return a.mean_availability > b.mean_availability;
    return a.encoding < b.encoding;
  });
  // After sorting by length, a point survives iff its availability beats every shorter point.
  std::vector<FrontierPoint> out;
  for (const auto& p : points) {
    if (!out.empty() && p.mean_availability <= out.back().mean_availability) continue;
    out.push_back(p);
  }
  return out;
}

std::vector<FrontierPoint> pareto_frontier(ObjectiveEvaluator& evaluator) {
  std::vector<FrontierPoint> points;
  for (const auto& c : evaluator.candidates()) {
    const auto r = evaluator.evaluate(c);
    points.push_back({c.encoding(), r.mean_isl_length, r.mean_availability});
  }
  return pareto_frontier(std::move(points));
}

}  // namespace mcn
