#include "crofton/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return crofton::cli::run(argc, argv, std::cout, std::cerr); }
