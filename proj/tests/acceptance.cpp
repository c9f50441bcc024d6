// One line per acceptance criterion; exit status 0 only when all thirteen pass.
//   acceptance [--scratch DIR] [--seed N] [--only K]

#include <cstdlib>
#include <iostream>
#include <string_view>

#include "fiolab/suite.hpp"

namespace {

void print(const fiolab::CriterionResult& r) {
  std::cout << "criterion " << (r.id < 10 ? " " : "") << r.id << "  " << (r.status == fiolab::Status::pass ? "PASS" : "FAIL")
            << "  " << r.title << "  (" << fiolab::to_string(r.status) << ", " << std::fixed << std::setprecision(1)
            << r.seconds << " s)\n"
            << "    " << r.metrics.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path scratch = std::filesystem::temp_directory_path() / "fiolab_acceptance";
  fiolab::SuiteOptions opts;
  int only = 0;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string_view flag = argv[i];
    if (flag == "--scratch") scratch = argv[i + 1];
    else if (flag == "--seed") opts.seed = std::stoull(argv[i + 1]);
    else if (flag == "--only") only = std::atoi(argv[i + 1]);
    else {
      std::cerr << "unknown flag " << flag << '\n';
      return 3;
    }
  }
  int failures = 0;
  for (int id = 1; id <= 13; ++id) {
    if (only && id != only) continue;
    const fiolab::CriterionResult r =
        id == 13 ? fiolab::criterion_determinism(opts, scratch) : fiolab::run_criterion(id, opts);
    print(r);
    failures += r.status != fiolab::Status::pass;
  }
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << failures << " failing" << std::endl;
  return failures ? 1 : 0;
}
