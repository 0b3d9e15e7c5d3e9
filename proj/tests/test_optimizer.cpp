#include <doctest.h>

#include <algorithm>
#include <set>

#include "mcn/optimizer.hpp"
#include "mcn/performance.hpp"
#include "mcn/scenario.hpp"

using namespace mcn;

namespace {

DesignSpace small_space(std::vector<Motif> motifs, std::vector<LatticeKind> lattices) {
  DesignSpace d{ConstellationConfig(8, 10, 0, deg_to_rad(53.0), 1000.0), 80, std::move(motifs)};
  d.lattices = std::move(lattices);
  d.dynamics.seed = 5;
  d.length_samples = 12;
  return d;
}

std::vector<Motif> plus_motifs() { return enumerate_candidate_motifs(GridMode::Plus); }

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("candidate enumeration honours lattice pairing") {
    ObjectiveEvaluator ev(small_space(enumerate_candidate_motifs(), {std::begin(kAllLattices), std::end(kAllLattices)}));
    std::set<std::string> keys;
    for (const auto& c : ev.candidates()) {
      CHECK(lattice_compatible(c.lattice, c.motif.grid_mode()));
      CHECK(c.config.size() <= 80);
      keys.insert(c.encoding());
    }
    CHECK(keys.size() == ev.candidates().size());
    CHECK(std::is_sorted(ev.candidates().begin(), ev.candidates().end(),
                         [](const auto& a, const auto& b) { return a.encoding() < b.encoding(); }));
    CHECK(ev.candidates().size() <= 50);
    CHECK(ev.candidate(Motif::parse("(1,0)"), LatticeKind::L1).has_value());
    CHECK_FALSE(ev.candidate(Motif::parse("(1,0)"), LatticeKind::L4).has_value());
  }

  TEST_CASE("duplicate motifs collapse") {
    auto motifs = plus_motifs();
    motifs.push_back(motifs.front());
    ObjectiveEvaluator ev(small_space(motifs, {LatticeKind::L1}));
    CHECK(ev.candidates().size() == 4);
  }

  TEST_CASE("zero fail coefficient scores the inverse length") {
    auto space = small_space({Motif::parse("(1,-1)")}, {LatticeKind::L1});
    space.dynamics.fail_coefficient = 0.0;
    ObjectiveEvaluator ev(space);
    const auto c = ev.candidates().front();
    const auto r = ev.evaluate(c);
    CHECK(r.mean_availability == 1.0);
    const double l = period_mean_edge_length(build_topology(c.config, c.motif), 12);
    CHECK(r.mean_isl_length == doctest::Approx(l).epsilon(1e-12));
    CHECK(r.score == doctest::Approx(1.0 / l).epsilon(1e-12));
  }

  TEST_CASE("evaluations are cached and deterministic") {
    ObjectiveEvaluator a(small_space(plus_motifs(), {LatticeKind::L1}));
    ObjectiveEvaluator b(small_space(plus_motifs(), {LatticeKind::L1}));
    for (const auto& c : a.candidates()) {
      const auto ra = a.evaluate(c);
      CHECK(ra.score == b.evaluate(c).score);
      CHECK(a.evaluate(c).score == ra.score);
    }
    CHECK(a.evaluations() == a.candidates().size());
  }

  TEST_CASE("tie break and score ordering") {
    const ObjectiveReport one{1.0, 1000.0, 1e-3};
    const ObjectiveReport half{1.0, 2000.0, 5e-4};
    CHECK(one.score / half.score == doctest::Approx(2.0));
    CHECK(better_candidate(one, "L2|(1,0)", half, "L1|(1,0)"));
    CHECK(better_candidate(one, "L1|(1,0)", one, "L2|(1,0)"));
    CHECK_FALSE(better_candidate(one, "L2|(1,0)", one, "L1|(1,0)"));
  }

  TEST_CASE("solution update keeps indices valid") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const auto next = solution_update({2}, 1, 1, 4, rng);
      REQUIRE(next.size() == 1);
      CHECK(next[0] != 2);
      CHECK(next[0] >= 0);
      CHECK(next[0] < 4);
    }
    const std::vector<int> assign{0, 1, 2, 3, 4};
    for (int trial = 0; trial < 100; ++trial) {
      const auto next = solution_update(assign, 2, 2, 6, rng);
      CHECK(next.size() == 5);
      for (int v : next) CHECK((v >= 0 && v < 6));
      const auto grown = solution_update(assign, 1, 3, 6, rng);
      CHECK(grown.size() == 7);
    }
  }

  TEST_CASE("single candidate is returned as is") {
    ObjectiveEvaluator ev(small_space({Motif::parse("(1,0)")}, {LatticeKind::L1}));
    REQUIRE(ev.candidates().size() == 1);
    OptimizerConfig cfg;
    cfg.lattices = {LatticeKind::L1};
    cfg.max_iterations = 5;
    const auto res = smlopt(ev, cfg);
    CHECK(res.best.encoding() == "L1|(1,0)");
    CHECK(res.report.score == ev.evaluate(ev.candidates().front()).score);
    const auto bf = brute_force_best(ev);
    CHECK(bf.best.encoding() == res.best.encoding());
    CHECK(bf.report.score == res.report.score);
  }

  TEST_CASE("smlopt never regresses and agrees with brute force") {
    ObjectiveEvaluator ev(small_space(plus_motifs(), {LatticeKind::L1, LatticeKind::L3}));
    const auto bf = brute_force_best(ev);
    for (std::uint64_t seed : {1, 2, 3}) {
      OptimizerConfig cfg;
      cfg.lattices = {LatticeKind::L1, LatticeKind::L3};
      cfg.max_iterations = 30;
      cfg.seed = seed;
      const auto res = smlopt(ev, cfg);
      CHECK(res.report.score <= bf.report.score);
      CHECK(res.report.score == bf.report.score);
      CHECK(res.best.encoding() == bf.best.encoding());
      CHECK(res.log.size() == 60);
      for (std::size_t i = 1; i < res.log.size(); ++i)
        if (res.log[i].lattice == res.log[i - 1].lattice)
          CHECK(res.log[i].current_score >= res.log[i - 1].current_score);
    }
  }

  TEST_CASE("smlopt is deterministic per seed") {
    ObjectiveEvaluator ev(small_space(enumerate_candidate_motifs(), {LatticeKind::L1, LatticeKind::L4}));
    OptimizerConfig cfg;
    cfg.lattices = {LatticeKind::L1, LatticeKind::L4};
    cfg.max_iterations = 20;
    cfg.seed = 11;
    const auto a = smlopt(ev, cfg), b = smlopt(ev, cfg);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].proposed == b.log[i].proposed);
    CHECK(a.best.encoding() == b.best.encoding());
  }

  TEST_CASE("infeasible and over-budget spaces") {
    // A single plane cannot host any inter-plane feature.
    DesignSpace d{ConstellationConfig(1, 10, 0, deg_to_rad(53.0), 1000.0), 10, plus_motifs()};
    d.lattices = {LatticeKind::L1};
    ObjectiveEvaluator ev(d);
    CHECK(ev.candidates().empty());
    OptimizerConfig cfg;
    cfg.lattices = {LatticeKind::L1};
    CHECK_THROWS_AS(smlopt(ev, cfg), Infeasible);
    CHECK_THROWS_AS(brute_force_best(ev), Infeasible);

    ObjectiveEvaluator big(small_space(plus_motifs(), {LatticeKind::L1}));
    CHECK_THROWS_AS(brute_force_best(big, 2), ValidationError);

    cfg.max_iterations = 0;
    CHECK_THROWS_AS(smlopt(big, cfg), ValidationError);
  }

  TEST_CASE("pareto frontier of synthetic points") {
    CHECK(pareto_frontier({{"a", 1000, 0.9}, {"b", 1000, 0.9}, {"c", 1000, 0.9}}).size() == 1);
    const auto dom = pareto_frontier({{"a", 1000, 0.9}, {"b", 1200, 0.8}});
    REQUIRE(dom.size() == 1);
    CHECK(dom[0].encoding == "a");

    Rng rng(21);
    std::vector<FrontierPoint> pts;
    for (int i = 0; i < 60; ++i)
      pts.push_back({"p" + std::to_string(i), rng.uniform(1000, 3000), rng.uniform(0.5, 1.0)});
    const auto front = pareto_frontier(pts);
    CHECK(std::is_sorted(front.begin(), front.end(),
                         [](const auto& a, const auto& b) { return a.mean_isl_length < b.mean_isl_length; }));
    std::set<std::string> on;
    for (const auto& f : front) on.insert(f.encoding);
    for (const auto& p : pts) {
      bool dominated = false;
      for (const auto& q : pts)
        dominated |= q.mean_isl_length <= p.mean_isl_length && q.mean_availability >= p.mean_availability &&
                     (q.mean_isl_length < p.mean_isl_length || q.mean_availability > p.mean_availability);
      CHECK(on.count(p.encoding) == (dominated ? 0u : 1u));
    }
  }

  TEST_CASE("reference plus-grid argmax") {
    const auto s = load_scenario(fixture_path("reference-24x36"));
    auto space = design_space(s);
    space.motifs = plus_motifs();
    space.lattices = {LatticeKind::L1};
    ObjectiveEvaluator ev(space);
    const auto bf = brute_force_best(ev);
    CHECK(bf.best.motif.to_string() == "(1,-1)");
    for (const auto& [c, r] : bf.evaluated)
      if (c.motif.to_string() != "(1,-1)") CHECK(r.score < bf.report.score);
  }

  TEST_CASE("reference frontier contains the (1,-1) structure") {
    const auto s = load_scenario(fixture_path("reference-24x36"));
    auto space = design_space(s);
    space.motifs = enumerate_candidate_motifs();
    space.lattices = {LatticeKind::L1};
    ObjectiveEvaluator ev(space);
    const auto front = pareto_frontier(ev);
    CHECK(std::any_of(front.begin(), front.end(), [](const auto& p) { return p.encoding == "L1|(1,-1)"; }));
  }

  TEST_CASE("Kuiper shell prefers the (1,-1) motif") {
    const auto s = load_scenario(fixture_path("kuiper"));
    ObjectiveEvaluator ev(design_space(s));
    const auto res = smlopt(ev, optimizer_config(s));
    CHECK(res.best.motif.to_string() == "(1,-1)");
  }
}
