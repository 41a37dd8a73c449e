#include <iostream>
#include <string>
#include <vector>

#include "grv/cli.h"

int main(int argc, char** argv) {
  return grv::RunCli(std::vector<std::string>(argv, argv + argc), std::cout,
                     std::cerr);
}
