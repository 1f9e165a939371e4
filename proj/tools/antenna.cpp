#include <iostream>

#include "qantenna/cli/runner.hpp"

int main(int argc, char** argv) { return qantenna::cli::main_entry(argc, argv, std::cout, std::cerr); }
