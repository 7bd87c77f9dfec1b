#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return mprcalc::cli::main_entry(argc, argv, std::cout, std::cerr); }
