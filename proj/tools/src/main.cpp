#include <iostream>

#include "ifl_cli/cli.hpp"

int main(int argc, char** argv) { return ifl::cli::run(argc, argv, std::cout, std::cerr); }
