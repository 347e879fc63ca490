#include <iostream>

#include "bdspectral/cli.hpp"

int main(int argc, char** argv) {
    return bdspectral::cli::run(argc, argv, std::cout, std::cerr);
}
