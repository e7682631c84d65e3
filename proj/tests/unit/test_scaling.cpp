#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "latfuse/scaling.hpp"

using namespace latfuse;

TEST_CASE("random_prisms sizes") {
  for (std::size_t cells : {64u, 256u, 2048u}) {
    const auto ps = random_prisms(cells, 3, 4, 1);
    REQUIRE(ps.size() == 3);
    CHECK(ps[0].grid.size() == cells);
    CHECK(ps[0].grid.S == 4);
    CHECK(ps[1].frame == 1);
  }
  CHECK(random_prisms(256, 2, 4, 7)[1].grid.values == random_prisms(256, 2, 4, 7)[1].grid.values);
}

TEST_CASE("small ladder") {
  LadderSpec spec;
  spec.cells = {128, 256};
  spec.min_batch_seconds = 0.001;
  spec.trials = 1;
  const auto rep = run_scaling_ladder(spec);
  REQUIRE(rep.rows.size() == 2);
  CHECK(!rep.rows[0].ratio_linear);
  CHECK(rep.rows[1].ratio_linear);
  for (const auto& row : rep.rows) {
    CHECK(row.objectives_match.value());
    CHECK(row.t_linear > 0.0);
  }
  const std::string table = format_scaling_table(rep);
  CHECK(table.find("n/a") != std::string::npos);
  std::ostringstream plot;
  write_plot_data(plot, rep);
  const std::string lines = plot.str();
  CHECK(std::count(lines.begin(), lines.end(), '\n') >= 4);

  spec.cells = {128};
  spec.run_quadratic = false;
  const auto lin = run_scaling_ladder(spec);
  CHECK(!lin.rows[0].t_quadratic);
  CHECK(!lin.rows[0].objectives_match);
}
