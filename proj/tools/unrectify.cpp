#include <iostream>

#include "unrectify/cli.hpp"

int main(int argc, char** argv) {
  return unrectify::run(argc, argv, std::cout, std::cerr);
}
