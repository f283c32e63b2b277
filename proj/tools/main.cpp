#include "fdl/cli.hpp"

int main(int argc, char** argv) {
    return fdl::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
