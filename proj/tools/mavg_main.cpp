#include <iostream>

#include "mavg/cli.hpp"

int main(int argc, char** argv) { return mavg::cli::run(argc, argv, std::cout, std::cerr); }
