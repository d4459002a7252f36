#include <iostream>

#include "deriloss/cli.hpp"

int main(int argc, char** argv) { return deriloss::cli::run(argc, argv, std::cout, std::cerr); }
