#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcn/dynamics.hpp"
#include "mcn/random.hpp"
#include "mcn/structure.hpp"

namespace mcn {

struct CandidateStructure {
  Motif motif;
  LatticeKind lattice;
  ConstellationConfig config;

  /// Sort key used for deterministic tie-breaks, e.g. "L2|(1,-1)".
  std::string encoding() const;
};

struct ObjectiveReport {
  double mean_availability = 0.0;
  double mean_isl_length = 0.0;  // km
  double score = 0.0;            // mean_availability / mean_isl_length, 1/km
};

/// Search space and evaluation settings shared by the optimizer and its oracle.
struct DesignSpace {
  ConstellationConfig base;
  int max_sats = 0;
  std::vector<Motif> motifs;
  std::vector<LatticeKind> lattices{std::begin(kAllLattices), std::end(kAllLattices)};
  AvailabilityModel dynamics;
  /// Availability horizon inside the objective, in orbital periods of the candidate.
  double horizon_periods = 1.0;
  int length_samples = 36;
  double capacity_gbps = kDefaultIslCapacityGbps;
};

/// Scores candidates with a shared ASR normalisation over the whole space and caches results.
class ObjectiveEvaluator {
 public:
  explicit ObjectiveEvaluator(DesignSpace space);

  const DesignSpace& space() const { return space_; }

  /// Feasible candidates ordered by encoding.
  const std::vector<CandidateStructure>& candidates() const { return candidates_; }
  std::optional<CandidateStructure> candidate(const Motif& motif, LatticeKind lattice) const;

  const AsrNormalizer& normalizer() const { return normalizer_; }

  ObjectiveReport evaluate(const CandidateStructure& c);
  std::size_t evaluations() const { return evaluations_; }

 private:
  DesignSpace space_;
  std::vector<CandidateStructure> candidates_;
  AsrNormalizer normalizer_ = AsrNormalizer::empty();
  std::map<std::string, ObjectiveReport> cache_;
  std::size_t evaluations_ = 0;
};

/// True when `a` beats `b`: higher score, ties to the smaller encoding.
bool better_candidate(const ObjectiveReport& a, const std::string& a_key, const ObjectiveReport& b,
                      const std::string& b_key);

struct OptimizerConfig {
  int max_iterations = 100;
  std::vector<LatticeKind> lattices{std::begin(kAllLattices), std::end(kAllLattices)};
  /// Neighbourhood: merge `merge_count` adjacent motifs, re-split into `split_count`.
  int merge_count = 1;
  int split_count = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct IterationLogEntry {
  LatticeKind lattice;
  int iteration = 0;
  std::string proposed;
  double proposed_score = 0.0;
  bool accepted = false;
  std::string current;
  double current_score = 0.0;
};

struct OptimizationResult {
  CandidateStructure best;
  ObjectiveReport report;
  std::vector<IterationLogEntry> log;
};

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Merge/split move on a motif assignment (indices into the candidate list).
std::vector<int> solution_update(const std::vector<int>& assignment, int merge_count,
                                 int split_count, int candidate_count, Rng& rng);

OptimizationResult smlopt(ObjectiveEvaluator& evaluator, const OptimizerConfig& config);

struct BruteForceResult {
  CandidateStructure best;
  ObjectiveReport report;
  std::vector<std::pair<CandidateStructure, ObjectiveReport>> evaluated;
};

BruteForceResult brute_force_best(ObjectiveEvaluator& evaluator, std::size_t max_candidates = 1000);

struct FrontierPoint {
  std::string encoding;
  double mean_isl_length = 0.0;
  double mean_availability = 0.0;
};

/// Non-dominated points (short length, high availability), sorted by length.
std::vector<FrontierPoint> pareto_frontier(std::vector<FrontierPoint> points);
std::vector<FrontierPoint> pareto_frontier(ObjectiveEvaluator& evaluator);

}  // namespace mcn
