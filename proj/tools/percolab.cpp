#include <iostream>

#include "percolab/cli.hpp"

int main(int argc, char** argv) { return percolab::cli::run(argc, argv, std::cout, std::cerr); }
