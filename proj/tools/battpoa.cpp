#include <iostream>

#include "battpoa/cli.hpp"

int main(int argc, char** argv) { return battpoa::run_cli(argc, argv, std::cout, std::cerr); }
