#include <iostream>

#include "hominv/cli.hpp"

int main(int argc, char** argv) { return hominv::cli::run(argc, argv, std::cout, std::cerr); }
