#include <iostream>

#include "fgs/cli_io.hpp"

int main(int argc, char** argv) { return fgs::run_cli(argc, argv, std::cout, std::cerr); }
