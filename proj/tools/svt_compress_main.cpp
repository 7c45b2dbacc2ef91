#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return svt::cli::run_svt_compress(argc, argv, std::cout, std::cerr); }
