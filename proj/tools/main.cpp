#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rsmkit/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::optional<std::string> env;
    if (const char* p = std::getenv("RSMKIT_PROJECT"); p && *p) env = p;
    return rsmkit::run_cli(args, std::cout, std::cerr, env);
}
