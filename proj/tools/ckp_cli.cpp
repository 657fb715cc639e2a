#include <iostream>

#include "ckp/harness.hpp"

int main(int argc, char** argv) { return ckp::cli_main(argc, argv, std::cout, std::cerr); }
