#include <iostream>

#include "slspec/cli.hpp"

int main(int argc, char** argv) { return slspec::cli::main(argc, argv, std::cout, std::cerr); }
