#include <string>
#include <vector>

#include "offlang/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return offlang::commands::run_command(args);
}
