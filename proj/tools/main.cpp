#include <iostream>

#include "drdqn/cli.hpp"

int main(int argc, char** argv) { return drdqn::run_cli(argc, argv, std::cout, std::cerr); }
