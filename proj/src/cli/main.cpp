#include <iostream>

#include "ocsplab/cli.hpp"

int main(int argc, char** argv) { return ocsplab::run_cli(argc, argv, std::cout, std::cerr); }
