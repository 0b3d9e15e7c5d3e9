#include "mcn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcn/random.hpp"

namespace mcn {

double swept_area(const RelativeGeometry& before, const RelativeGeometry& after) {
  return 0.5 * std::abs(std::sin(after.deviation - before.deviation)) * after.range *
         before.range;
}

double asr(const Satellite& a, const Satellite& b, double t1, double t2) {
  if (!(t2 > t1)) throw ValidationError("asr needs t2 > t1");
  const auto a1 = propagate(a, t1), a2 = propagate(a, t2);
  const auto b1 = propagate(b, t1), b2 = propagate(b, t2);
  const double from_a = swept_area(relative_geometry(a1, b1), relative_geometry(a2, b2));
  const double from_b = swept_area(relative_geometry(b1, a1), relative_geometry(b2, a2));
  return 0.5 * (from_a + from_b) / (t2 - t1);
}

AsrNormalizer AsrNormalizer::empty() {
  return {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
}

double AsrNormalizer::operator()(double raw) const {
  const double span = max - min;
  if (!(span > 0.0)) return 0.0;
  return std::clamp((raw - min) / span, 0.0, 1.0);
}

void AsrNormalizer::include(double raw) {
  min = std::min(min, raw);
  max = std::max(max, raw);
}

void AsrNormalizer::merge(const AsrNormalizer& other) {
  min = std::min(min, other.min);
  max = std::max(max, other.max);
}

std::vector<double> normalize_asr(std::span<const double> samples) {
  auto norm = AsrNormalizer::empty();
  for (double v : samples) norm.include(v);
  std::vector<double> out;
  out.reserve(samples.size());
  for (double v : samples) out.push_back(norm(v));
  return out;
}

AsrField::AsrField(const ConstellationConfig& config, std::span<const ConnectionFeature> features,
                   double step, int steps)
    : config_(config), step_(step), steps_(steps) {
  if (!(step > 0.0) || steps < 1) throw ValidationError("ASR sampling needs step > 0 and steps >= 1");
  const auto sats = generate_constellation(config);
  const int n = config.size();
  const int np = config.n_planes(), mp = config.sats_per_plane();

  struct Pair {
    ConnectionFeature feature;
    std::vector<int> target;
    std::vector<RelativeGeometry> fwd, back;
  };
  std::vector<Pair> pairs;
  for (const auto& f : features) {
    if (rows_.count(f)) continue;
    Pair p{f, std::vector<int>(n), {}, {}};
    for (int a = 0; a < n; ++a) {
      const auto id = satellite_at(a, config);
      p.target[a] = flat_index(
          {((id.plane + f.dx) % np + np) % np, ((id.slot + f.dy) % mp + mp) % mp}, config);
      if (p.target[a] == a)
        throw ValidationError("feature " + to_string(f) + " reduces to a self-loop");
    }
    rows_.emplace(f, std::vector<float>(static_cast<std::size_t>(n) * steps));
    pairs.push_back(std::move(p));
  }

  for (int k = 0; k <= steps; ++k) {
    const auto states = propagate_all(sats, k * step);
    for (auto& p : pairs) {
      auto& row = rows_.at(p.feature);
      std::vector<RelativeGeometry> fwd(n), back(n);
      for (int a = 0; a < n; ++a) {
        fwd[a] = relative_geometry(states[a], states[p.target[a]]);
        back[a] = relative_geometry(states[p.target[a]], states[a]);
        if (k > 0) {
          const double area = 0.5 * (swept_area(p.fwd[a], fwd[a]) + swept_area(p.back[a], back[a]));
          const double rate = area / step;
          row[static_cast<std::size_t>(a) * steps + (k - 1)] = static_cast<float>(rate);
          range_.include(static_cast<float>(rate));
        }
      }
      p.fwd = std::move(fwd);
      p.back = std::move(back);
    }
  }
}

std::span<const float> AsrField::samples(const ConnectionFeature& f, int source) const {
  const auto it = rows_.find(f);
  if (it == rows_.end()) throw ValidationError("ASR field has no samples for " + to_string(f));
  return {it->second.data() + static_cast<std::size_t>(source) * steps_,
          static_cast<std::size_t>(steps_)};
}

double AsrField::mean(const ConnectionFeature& f) const {
  const auto it = rows_.find(f);
  if (it == rows_.end()) throw ValidationError("ASR field has no samples for " + to_string(f));
  double sum = 0.0;
  for (float v : it->second) sum += v;
  return it->second.empty() ? 0.0 : sum / static_cast<double>(it->second.size());
}

void AvailabilityModel::validate() const {
  if (!(fail_coefficient >= 0.0 && fail_coefficient <= 1.0))
    throw ValidationError("fail_coefficient must lie in [0, 1]");
  if (!(recovery_time > 0.0)) throw ValidationError("recovery_time must be > 0");
  if (!(step > 0.0)) throw ValidationError("step must be > 0");
}

int AvailabilityModel::recovery_steps() const {
  // Guard against 60/10 landing a hair above 6 in floating point.
  return static_cast<int>(std::ceil(recovery_time / step - 1e-9));
}

AvailabilityTrace::AvailabilityTrace(std::size_t edges, int steps, double step)
    : edges_(edges), steps_(steps), step_(step), data_(edges * static_cast<std::size_t>(steps), 1) {}

int AvailabilityTrace::step_at(double t) const {
  const int k = static_cast<int>(std::floor(t / step_ + 1e-9));
  return std::clamp(k, 0, steps_ - 1);
}

void simulate_link(std::span<const double> fail_prob, int recovery_steps, std::uint64_t seed,
                   std::span<std::uint8_t> out) {
  Rng rng(seed);
  int down_left = 0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double u = rng.uniform();
    if (down_left > 0) {
      out[k] = 0;
      --down_left;
      continue;
    }
    if (u < fail_prob[k]) {
      out[k] = 0;
      down_left = recovery_steps - 1;
    } else {
      out[k] = 1;
    }
  }
}

std::uint64_t link_seed(std::uint64_t seed, int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return derive_seed(derive_seed(seed, "link"), (lo << 32) | hi);
}

AvailabilityTrace simulate_availability(const IslGraph& graph, const AsrField& field,
                                        const AsrNormalizer& normalizer,
                                        const AvailabilityModel& model, double horizon) {
  model.validate();
  if (std::abs(field.step() - model.step) > 1e-9)
    throw ValidationError("ASR field and availability model use different steps");
  const int steps = static_cast<int>(std::floor(horizon / model.step + 1e-9));
  if (steps < 10) throw ValidationError("availability horizon must cover at least 10 steps");
  if (steps > field.steps()) throw ValidationError("ASR field shorter than availability horizon");

  AvailabilityTrace trace(graph.edge_count(), steps, model.step);
  std::vector<double> prob(static_cast<std::size_t>(steps));
  const int recovery = model.recovery_steps();
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const auto& edge = graph.edge(e);
    const auto raw = field.samples(edge.feature, edge.a);
    for (int k = 0; k < steps; ++k) prob[k] = model.fail_coefficient * normalizer(raw[k]);
    simulate_link(prob, recovery, link_seed(model.seed, edge.a, edge.b), trace.series(e));
  }
  return trace;
}

double availability_ratio(const AvailabilityTrace& trace, std::size_t edge) {
  if (trace.steps() == 0) throw ValidationError("empty availability trace");
  const auto s = trace.series(edge);
  std::size_t up = 0;
  for (auto v : s) up += v;
  return static_cast<double>(up) / static_cast<double>(s.size());
}

double mean_availability(const AvailabilityTrace& trace) {
  if (trace.edge_count() == 0) return 1.0;
  double sum = 0.0;
  for (std::size_t e = 0; e < trace.edge_count(); ++e) sum += availability_ratio(trace, e);
  return sum / static_cast<double>(trace.edge_count());
}

CalibrationResult calibrate_fail_coefficient(double target,
                                             const std::function<double(double)>& mean_ra,
                                             double tolerance, int max_iterations) {
  if (!(target > 0.0 && target <= 1.0)) throw ValidationError("target R_a must lie in (0, 1]");
  double lo = 0.0, hi = 1.0;
  const double at_hi = mean_ra(hi);
  if (at_hi >= target) return {hi, at_hi, std::abs(at_hi - target) <= tolerance};

  CalibrationResult best{0.0, mean_ra(0.0), false};
  for (int it = 0; it < max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double ra = mean_ra(mid);
    if (std::abs(ra - target) < std::abs(best.achieved - target)) best = {mid, ra, false};
    if (std::abs(ra - target) <= tolerance) return {mid, ra, true};
    (ra > target ? lo : hi) = mid;
  }
  best.converged = std::abs(best.achieved - target) <= tolerance;
  return best;
}

}  // namespace mcn
