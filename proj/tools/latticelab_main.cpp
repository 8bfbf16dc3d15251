#include "latticelab/cli.hpp"

int main(int argc, char** argv) { return latticelab::run_cli(argc, argv); }
