#include "spotvol/cli.hpp"

int main(int argc, char** argv) { return spotvol::cli_main(argc, argv); }
