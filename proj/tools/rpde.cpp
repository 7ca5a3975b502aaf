#include <iostream>

#include "rpde/commands.hpp"

int main(int argc, char** argv) { return rpde::run_cli(argc, argv, std::cout, std::cerr); }
