#include <iostream>

#include "elfuse/cli.hpp"

int main(int argc, char** argv) {
  return elfuse::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
