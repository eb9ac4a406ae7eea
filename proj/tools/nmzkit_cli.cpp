#include <iostream>

#include "nmzkit/cli.hpp"

int main(int argc, char** argv) { return nmzkit::cli::main_entry(argc, argv, std::cout, std::cerr); }
