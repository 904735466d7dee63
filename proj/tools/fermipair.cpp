#include <fermipair/cli.hpp>

#include <iostream>

int main(int argc, char** argv) {
  return fermipair::cli::main_entry(argc, argv, std::cout, std::cerr);
}
