#include <iostream>

#include "aamsupcon_cli/cli.hpp"

int main(int argc, char** argv) { return aamsupcon::cli::run(argc, argv, std::cout, std::cerr); }
