#include <iostream>
#include <string>
#include <vector>

#include "resclf/cli.hpp"

int main(int argc, char** argv) {
  return resclf::run_cli(std::vector<std::string>(argv, argv + argc), std::cout,
                         std::cerr);
}
