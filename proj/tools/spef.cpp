#include <iostream>

#include "spef/cli.hpp"

int main(int argc, char** argv) { return spef::cli::run(argc, argv, std::cout, std::cerr); }
