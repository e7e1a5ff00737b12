#include <string>
#include <vector>

#include "viterbo/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return viterbo::run_cli(std::move(args));
}
