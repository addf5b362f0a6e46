#include <iostream>

#include "nplda/cli/cli.hpp"

int main(int argc, char** argv) { return nplda::cli::run(argc, argv, std::cout, std::cerr); }
