#include <iostream>
#include <string>
#include <vector>

#include "detect/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return detect::cli::run(args, std::cout, std::cerr);
}
