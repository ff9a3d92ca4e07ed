// greenfuzz command-line entry point.

#include "greenfuzz/cli.hpp"

int main(int argc, char** argv) { return greenfuzz::run_cli(argc, argv); }
