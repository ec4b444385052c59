#include <iostream>

#include "nlkg/harness.hpp"

int main(int argc, char** argv) { return nlkg::run_command(argc, argv, std::cout, std::cerr); }
