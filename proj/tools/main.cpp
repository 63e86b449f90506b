#include "mixres/cli.hpp"

int main(int argc, char** argv) { return mixres::run_cli(argc, argv); }
