#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "qnof/synthbench.hpp"

using namespace qnof;

TEST_CASE("random lowrank samples have the planted rank") {
  const QuatMatrix full = random_lowrank(8, 8, 1);
  CHECK(numeric_rank(full, 1e-6) == 8);

  const QuatMatrix r1 = random_lowrank(10, 1, 2);
  CHECK(qnof_value(r1) == Catch::Approx(1.0).margin(1e-10));

  const QuatMatrix r4 = random_lowrank(50, 4, 3);
  CHECK(numeric_rank(r4, 1e-6) == 4);

  CHECK_THROWS_AS(random_lowrank(5, 6, 0), std::invalid_argument);
  CHECK_THROWS_AS(random_lowrank(5, 0, 0), std::invalid_argument);

  // seeded determinism
  CHECK(fro_norm(random_lowrank(20, 3, 7) - random_lowrank(20, 3, 7)) == 0.0);
}

TEST_CASE("clean full-observation trial recovers to the solver floor") {
  TrialSpec spec;
  spec.n = 30;
  spec.rank = 1;
  spec.miss_rate = 0.0;
  spec.noise_rate = 0.0;
  spec.seed = 11;
  spec.success_threshold = 1e-10;
  const TrialRecord rec = run_trial(spec, 0);
  CHECK(rec.rel_error <= 1e-10);
  CHECK(rec.recovered_rank == 1);
  CHECK(rec.success);
}

TEST_CASE("table-style trial succeeds at rank 2") {
  TrialSpec spec;
  spec.n = 50;
  spec.rank = 2;
  spec.seed = 13;
  const TrialRecord rec = run_trial(spec, 0);
  CHECK(rec.success);
  CHECK(rec.recovered_rank == 2);
  CHECK(rec.rel_error <= 1e-8);
}

TEST_CASE("trials are deterministic and parallel-safe") {
  TrialSpec spec;
  spec.n = 24;
  spec.rank = 2;
  spec.trials = 4;
  spec.seed = 17;
  const auto a = run_trials(spec);
  const auto b = run_trials(spec);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rel_error == b[i].rel_error);
    CHECK(a[i].recovered_rank == b[i].recovered_rank);
    CHECK(a[i].iterations == b[i].iterations);
  }
}

TEST_CASE("single-cell phase diagram") {
  PhaseGrid grid;
  grid.n = 24;
  grid.ranks = {2};
  grid.levels = {0.05};
  grid.trials = 4;
  grid.seed = 19;
  const auto cells = phase_diagram(grid);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].rank == 2);
  CHECK(cells[0].corruption == 0.05);
  CHECK(cells[0].records.size() == 4);
  int ok = 0;
  for (const auto& r : cells[0].records) ok += r.success ? 1 : 0;
  CHECK(cells[0].recovery_rate == Catch::Approx(double(ok) / 4.0));
}

TEST_CASE("csv schema") {
  TrialSpec spec;
  spec.n = 16;
  spec.rank = 2;
  spec.trials = 2;
  spec.seed = 23;
  spec.params.max_iters = 50;
  const auto records = run_trials(spec);
  std::ostringstream os;
  write_trials_csv(os, records);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header ==
        "n,rank,miss_rate,noise_rate,trial,recovered_rank,rel_error,success,"
        "iterations,wall_time_ms");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 2);
}
