#include <vector>

#include "persim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return persim::run_cli(args);
}
