#include "confignet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return confignet::cli_main(argc, argv, std::cout, std::cerr); }
