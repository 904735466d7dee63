// Runs the acceptance criteria and prints one PASS/FAIL line for each.
//   acceptance [--criterion N]... [--seed S]

#include <fermipair/acceptance.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  namespace acc = fermipair::acceptance;
  acc::Settings settings;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) ids.push_back(std::atoi(argv[++i]));
    else if (arg == "--seed" && i + 1 < argc) settings.seed = std::strtoull(argv[++i], nullptr, 10);
    else {
      std::fprintf(stderr, "usage: %s [--criterion N]... [--seed S]\n", argv[0]);
      return 2;
    }
  }
  if (ids.empty())
    for (int id = 1; id <= static_cast<int>(acc::criteria().size()); ++id) ids.push_back(id);

  int failed = 0;
  for (int id : ids) {
    const acc::Outcome o = acc::run(id, settings);
    std::printf("%s\n", acc::format(o).c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
