#include <iostream>
#include <string>
#include <vector>

#include "tcl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return tcl::runCli(args, std::cout, std::cerr);
}
