#include <string>
#include <vector>

#include "gradsign/cli.hpp"

int main(int argc, char** argv) {
    return gradsign::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
