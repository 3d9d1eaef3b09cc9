#include <iostream>

#include "coc/cli.hpp"

int main(int argc, char** argv) { return coc::run_cli(argc, argv, std::cout, std::cerr); }
