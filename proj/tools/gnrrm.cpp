#include <iostream>

#include "gnrrm/cli/commands.hpp"

int main(int argc, char** argv) { return gnrrm::cli::run(argc, argv, std::cout, std::cerr); }
