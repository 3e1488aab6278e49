#include <iostream>

#include "kernelnet/cli.hpp"

int main(int argc, char** argv) { return kernelnet::cli::run(argc, argv, std::cout, std::cerr); }
