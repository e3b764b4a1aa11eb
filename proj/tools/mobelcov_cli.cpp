#include <string>
#include <vector>

#include "mobelcov/cli.hpp"

int main(int argc, char** argv) {
    return mobelcov::cli::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
