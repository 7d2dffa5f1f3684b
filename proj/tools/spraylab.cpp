#include "spraylab/cli.hpp"

int main(int argc, char** argv) { return spraylab::run_cli(argc, argv); }
