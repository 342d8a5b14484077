#include "impgen/cli.hpp"

int main(int argc, char** argv) { return impgen::cli::main(argc, argv); }
