#include <iostream>

#include "pgspec/cli.hpp"

int main(int argc, char** argv) { return pgspec::run_cli(argc, argv, std::cout, std::cerr); }
