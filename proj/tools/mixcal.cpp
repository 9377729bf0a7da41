#include <iostream>

#include "mixcal/cli.hpp"

int main(int argc, char** argv) { return mixcal::run_cli(argc, argv, std::cout, std::cerr); }
