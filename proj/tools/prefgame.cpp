#include <iostream>

#include "prefgame/cli.hpp"

int main(int argc, char** argv) {
  return prefgame::cli::main(argc, argv, std::cout, std::cerr);
}
