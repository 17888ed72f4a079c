#include "lodin/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lodin::cli::run(argc, argv, std::cout, std::cerr); }
