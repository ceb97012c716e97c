#include "depthpoison/cli.hpp"

int main(int argc, char** argv) { return depthpoison::cli::run(argc, argv); }
