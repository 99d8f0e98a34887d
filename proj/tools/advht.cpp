#include <iostream>

#include "advht/cli.hpp"

int main(int argc, char** argv) { return advht::run_cli(argc, argv, std::cout, std::cerr); }
