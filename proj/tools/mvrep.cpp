#include <iostream>

#include "mvrep/cli.hpp"

int main(int argc, char** argv) { return mvrep::cli::run(argc, argv, std::cout, std::cerr); }
