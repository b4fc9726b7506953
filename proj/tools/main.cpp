#include <iostream>

#include "aiart/cli.hpp"

int main(int argc, char** argv) { return aiart::run_cli(argc, argv, std::cout, std::cerr); }
