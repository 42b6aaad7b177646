#include <iostream>

#include "ising_cli.hpp"

int main(int argc, char** argv) { return ising::cli::run_cli(argc, argv, std::cout, std::cerr); }
