#include "dynmap/harness/cli.hpp"

int main(int argc, char** argv) { return dynmap::harness::run_cli(argc, argv); }
