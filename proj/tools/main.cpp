#include <iostream>

#include "causalrd/cli.hpp"

int main(int argc, char** argv) { return causalrd::dispatch(argc, argv, std::cout, std::cerr); }
