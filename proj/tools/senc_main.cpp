#include <iostream>

#include "senc/cli.hpp"

int main(int argc, char** argv) { return senc::run_cli(argc, argv, std::cout, std::cerr); }
