#include <iostream>

#include "embedlab/cli.hpp"

int main(int argc, char** argv) {
    return embedlab::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
