#include "vlq/cli.hpp"

int main(int argc, char** argv) { return vlq::cli::main(argc, argv); }
