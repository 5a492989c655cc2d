#include <iostream>

#include "structcomp/cli.hpp"

int main(int argc, char** argv) { return structcomp::run_cli(argc, argv, std::cout, std::cerr); }
