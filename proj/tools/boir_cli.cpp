#include <iostream>

#include "boir/cli.hpp"

int main(int argc, char** argv) { return boir::cli::run_main(argc, argv, std::cout, std::cerr); }
