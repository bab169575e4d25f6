#include <iostream>

#include "qmetro/cli.hpp"

int main(int argc, char** argv) {
  return qmetro::cli::run(argc, argv, std::cout, std::cerr);
}
