#include <iostream>

#include "ias/cli.hpp"

int main(int argc, char** argv) { return ias::run_cli(argc, argv, std::cout, std::cerr); }
