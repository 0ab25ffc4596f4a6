#include "solfree/cli.hpp"

int main(int argc, char** argv) { return solfree::cli::main(argc, argv); }
