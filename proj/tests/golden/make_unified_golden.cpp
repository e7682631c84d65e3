// Regenerates tests/data/unified_4x4x2.{prism,hmm,golden} from the exhaustive
// joint-path oracle. Not run by ctest; the outputs are committed.
//
//   make_unified_golden <output dir>

#include <fstream>
#include <iostream>

#include "latfuse/io.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_unified_golden <output dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  gen::Engine e(20261019);
  auto prisms = gen::prisms(e, 4, 4, 4, 2);
  for (auto& p : prisms) p.alpha = 0.75;
  const auto model = gen::model(e, 2, {8.0, 8.0}, "golden");
  const auto best = oracle::unified_exhaustive(prisms, model, 0.75);

  std::ofstream prism_file(dir + "/unified_4x4x2.prism");
  latfuse::io::write_prisms(prism_file, prisms);
  std::ofstream model_file(dir + "/unified_4x4x2.hmm");
  latfuse::io::write_models(model_file, std::vector<latfuse::HmmModel>{model});
  std::ofstream golden(dir + "/unified_4x4x2.golden");
  golden << latfuse::io::format_real(best.value) << '\n';
  for (std::size_t t = 0; t < best.choice.size(); ++t)
    golden << t << ' ' << best.choice[t] / model.states() << ' ' << best.choice[t] % model.states() << '\n';
  std::cout << "objective " << latfuse::io::format_real(best.value) << '\n';
  return 0;
}
