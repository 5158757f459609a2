#include <iostream>

#include "editdyn/cli.hpp"

int main(int argc, char** argv) { return editdyn::run_cli(argc, argv, std::cout, std::cerr); }
