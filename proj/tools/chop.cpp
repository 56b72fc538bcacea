#include "chop/cli.hpp"

int main(int argc, char** argv) { return chop::cli::main(argc, argv); }
