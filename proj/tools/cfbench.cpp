#include <iostream>

#include "cfbench/cli.hpp"

int main(int argc, char** argv) { return cfbench::run_cli(argc, argv, std::cout, std::cerr); }
