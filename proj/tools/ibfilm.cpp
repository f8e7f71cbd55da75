#include "ibfilm/cli.hpp"

int main(int argc, char** argv) { return ibfilm::cli_main(argc, argv); }
