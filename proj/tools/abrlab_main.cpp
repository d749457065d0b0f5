#include <string>
#include <vector>

#include "abrlab/cli.hpp"

int main(int argc, char** argv) {
  return abrlab::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
