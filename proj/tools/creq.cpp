#include <iostream>
#include <string>
#include <vector>

#include "creq/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return creq::run_cli(args, std::cout, std::cerr);
}
