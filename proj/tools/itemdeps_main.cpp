#include <iostream>

#include "itemdeps/cli.hpp"

int main(int argc, char** argv) { return itemdeps::cli::run(argc, argv, std::cout, std::cerr); }
