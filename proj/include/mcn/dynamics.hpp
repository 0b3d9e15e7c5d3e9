#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "mcn/geometry.hpp"
#include "mcn/structure.hpp"

namespace mcn {

/// Triangle area swept by the relative position vector between two samples, km^2.
double swept_area(const RelativeGeometry& before, const RelativeGeometry& after);

/// Area swept rate of an ISL over (t1, t2), averaged over both endpoints, km^2/s.
double asr(const Satellite& a, const Satellite& b, double t1, double t2);

/// Affine map of raw ASR onto [0, 1]; a degenerate range maps everything to 0.
struct AsrNormalizer {
  double min = 0.0;
  double max = 0.0;

  double operator()(double raw) const;
  void include(double raw);
  void merge(const AsrNormalizer& other);

  static AsrNormalizer empty();
};

std::vector<double> normalize_asr(std::span<const double> samples);

/// Raw ASR samples of a set of features on one constellation, per source satellite and step.
///
/// Sample k covers (k * step, (k + 1) * step). The edge a -> a + feature shares the sample
/// row of satellite a.
class AsrField {
 public:
  AsrField(const ConstellationConfig& config, std::span<const ConnectionFeature> features,
           double step, int steps);

  const ConstellationConfig& config() const { return config_; }
  double step() const { return step_; }
  int steps() const { return steps_; }
  bool has(const ConnectionFeature& f) const { return rows_.count(f) != 0; }

  std::span<const float> samples(const ConnectionFeature& f, int source) const;
  double mean(const ConnectionFeature& f) const;
  AsrNormalizer range() const { return range_; }

 private:
  ConstellationConfig config_;
  double step_;
  int steps_;
  std::map<ConnectionFeature, std::vector<float>> rows_;
  AsrNormalizer range_ = AsrNormalizer::empty();
};

struct AvailabilityModel {
  /// Scales normalised ASR into a per-step failure probability.
  double fail_coefficient = 0.05;
  double recovery_time = 60.0;  // s
  double step = 10.0;           // s
  std::uint64_t seed = 1;

  void validate() const;
  /// Down steps after each failure, ceil(recovery_time / step).
  int recovery_steps() const;
};

/// Per-edge up/down samples Y(t_k), t_k = k * step.
class AvailabilityTrace {
 public:
  AvailabilityTrace(std::size_t edges, int steps, double step);

  std::size_t edge_count() const { return edges_; }
  int steps() const { return steps_; }
  double step() const { return step_; }
  double horizon() const { return steps_ * step_; }

  bool up(std::size_t edge, int k) const { return data_[edge * steps_ + k] != 0; }
  std::span<const std::uint8_t> series(std::size_t edge) const {
    return {data_.data() + edge * steps_, static_cast<std::size_t>(steps_)};
  }
  std::span<std::uint8_t> series(std::size_t edge) {
    return {data_.data() + edge * steps_, static_cast<std::size_t>(steps_)};
  }
  /// Sample index covering time t (clamped to the horizon).
  int step_at(double t) const;

 private:
  std::size_t edges_;
  int steps_;
  double step_;
  std::vector<std::uint8_t> data_;
};

/// Single-link failure/recovery process. `fail_prob[k]` is the failure probability at step k
/// while the link is up; one uniform draw is consumed per step regardless of state.
void simulate_link(std::span<const double> fail_prob, int recovery_steps, std::uint64_t seed,
                   std::span<std::uint8_t> out);

/// Stream seed of the physical link {a, b}; independent of edge ordering.
std::uint64_t link_seed(std::uint64_t seed, int a, int b);

AvailabilityTrace simulate_availability(const IslGraph& graph, const AsrField& field,
                                        const AsrNormalizer& normalizer,
                                        const AvailabilityModel& model, double horizon);

double availability_ratio(const AvailabilityTrace& trace, std::size_t edge);
double mean_availability(const AvailabilityTrace& trace);

struct CalibrationResult {
  double fail_coefficient = 0.0;
  double achieved = 0.0;
  bool converged = false;
};

/// Bisection on the fail coefficient in [0, 1] so that `mean_ra(coefficient)` hits `target`.
CalibrationResult calibrate_fail_coefficient(double target,
                                             const std::function<double(double)>& mean_ra,
                                             double tolerance = 1e-3, int max_iterations = 40);

}  // namespace mcn
