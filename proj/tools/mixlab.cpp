#include "mixlab/cli.hpp"

int main(int argc, char** argv) { return mixlab::cli::run(argc, argv); }
