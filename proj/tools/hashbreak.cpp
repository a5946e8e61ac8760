#include <iostream>

#include "hashbreak/cli.hpp"

int main(int argc, char** argv) {
    return hashbreak::cli::run(argc, argv, std::cout, std::cerr);
}
